/** Adam with bias correction, walking the model's parameter arrays in the
 * fixed order given by arraysOf. */

import { ModelParams, arraysOf } from "./model.js";

export interface AdamConfig {
  lr: number;
  beta1?: number;
  beta2?: number;
  eps?: number;
}

export class Adam {
  private readonly params: Float64Array[];
  private readonly m: Float64Array[];
  private readonly v: Float64Array[];
  private readonly lr: number;
  private readonly beta1: number;
  private readonly beta2: number;
  private readonly eps: number;
  private t = 0;

  constructor(model: ModelParams, config: AdamConfig) {
    this.params = arraysOf(model);
    this.m = this.params.map((p) => new Float64Array(p.length));
    this.v = this.params.map((p) => new Float64Array(p.length));
    this.lr = config.lr;
    this.beta1 = config.beta1 ?? 0.9;
    this.beta2 = config.beta2 ?? 0.999;
    this.eps = config.eps ?? 1e-8;
  }

  /** One update from gradients laid out like the model (see arraysOf). */
  step(grads: ModelParams): void {
    const g = arraysOf(grads);
    if (g.length !== this.params.length) {
      throw new Error("gradient layout does not match the model");
    }
    this.t += 1;
    const c1 = 1 - Math.pow(this.beta1, this.t);
    const c2 = 1 - Math.pow(this.beta2, this.t);
    for (let k = 0; k < this.params.length; k++) {
      const p = this.params[k];
      const gk = g[k];
      const mk = this.m[k];
      const vk = this.v[k];
      for (let i = 0; i < p.length; i++) {
        mk[i] = this.beta1 * mk[i] + (1 - this.beta1) * gk[i];
        vk[i] = this.beta2 * vk[i] + (1 - this.beta2) * gk[i] * gk[i];
        p[i] -= (this.lr * (mk[i] / c1)) / (Math.sqrt(vk[i] / c2) + this.eps);
      }
    }
  }
}
