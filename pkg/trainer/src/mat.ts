/** Row-major float64 matrices, sized for models small enough that plain
 * loops beat any copying into a BLAS-shaped layout. */

export interface Mat {
  rows: number;
  cols: number;
  data: Float64Array;
}

export function zerosMat(rows: number, cols: number): Mat {
  return { rows, cols, data: new Float64Array(rows * cols) };
}

export function zerosVec(n: number): Float64Array {
  return new Float64Array(n);
}

export function copyMat(m: Mat): Mat {
  return { rows: m.rows, cols: m.cols, data: m.data.slice() };
}

/** out = m @ x (out may not alias x). */
export function matvec(m: Mat, x: Float64Array, out: Float64Array): void {
  const { rows, cols, data } = m;
  for (let r = 0; r < rows; r++) {
    let acc = 0;
    const base = r * cols;
    for (let c = 0; c < cols; c++) acc += data[base + c] * x[c];
    out[r] = acc;
  }
}

/** out += m^T @ y (out length = cols). */
export function addMatTVec(m: Mat, y: Float64Array, out: Float64Array): void {
  const { rows, cols, data } = m;
  for (let r = 0; r < rows; r++) {
    const yr = y[r];
    if (yr === 0) continue;
    const base = r * cols;
    for (let c = 0; c < cols; c++) out[c] += data[base + c] * yr;
  }
}

/** grad += y (outer) x, the gradient of y = m @ x with respect to m. */
export function addOuter(grad: Mat, y: Float64Array, x: Float64Array): void {
  const { cols, data } = grad;
  for (let r = 0; r < y.length; r++) {
    const yr = y[r];
    if (yr === 0) continue;
    const base = r * cols;
    for (let c = 0; c < cols; c++) data[base + c] += yr * x[c];
  }
}

export function addVec(acc: Float64Array, v: Float64Array): void {
  for (let i = 0; i < acc.length; i++) acc[i] += v[i];
}

export function rowOf(m: Mat, r: number): Float64Array {
  return m.data.subarray(r * m.cols, (r + 1) * m.cols);
}
