#!/usr/bin/env python3
"""Best-effort converter from raw CELEX lemma exports to the normalized
6-column TSV the ingest pipeline consumes.

CELEX ships backslash-separated ``.cd`` files whose column layout varies by
language and subset, so this script makes its assumptions explicit and
overridable rather than guessing:

 - ``--phonology`` (required) is a lemma phonology file (English: ``epl.cd``)
   read as ``IdNum \\ Head \\ Cob \\ PronCnt \\ PronStatus \\ PhonStrsDISC ...``;
   override the two column positions with ``--head-col`` / ``--disc-col``.
 - The DISC transcription uses one character per phone; stress marks
   (``'`` and ``"``) and syllable dashes (``-``) are stripped and the rest
   is split into space-separated single-character symbols.
 - Only the first pronunciation column is used when PronCnt > 1.
 - ``--morphology`` (optional; English: ``eml.cd``) is joined on IdNum to
   fill morph status from its MorphStatus column (``M`` → mono, ``Z`` → mono
   with the zero-derivation flag raised, anything else → multi).  Without
   it every row is written as mono with the flag down, which overstates the
   monomorphemic lexicon; the summary warns when that fallback is active.
 - ``--syntax`` (optional; English: ``esl.cd``) is joined on IdNum to map
   ClassNum to a part-of-speech label; otherwise POS is ``UNK``.

Output columns: orthography, transcription, morph status (mono|multi),
zero-derivation flag (0|1), lexeme id (celex:IdNum), POS.
"""

import argparse
import sys

CLASS_NUM_POS = {
    "1": "N", "2": "A", "3": "NUM", "4": "V", "5": "ART", "6": "PRON",
    "7": "ADV", "8": "PREP", "9": "C", "10": "I", "11": "SCON",
    "12": "CCON", "13": "LET", "14": "ABB", "15": "TO",
}
STRESS_MARKS = set("'\"-")


def read_cd(path):
    with open(path, encoding="latin-1") as fh:
        for line_no, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if line:
                yield line_no, line.split("\\")


def disc_to_symbols(disc: str) -> str:
    return " ".join(ch for ch in disc if ch not in STRESS_MARKS)


def load_join(path, value_col, label):
    table = {}
    if path is None:
        return table
    for line_no, cols in read_cd(path):
        if len(cols) <= value_col:
            print(f"{path}:{line_no}: too few columns for {label}, skipped",
                  file=sys.stderr)
            continue
        table[cols[0]] = cols[value_col]
    return table


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--phonology", required=True,
                    help="lemma phonology .cd file (e.g. epl.cd)")
    ap.add_argument("--morphology",
                    help="lemma morphology .cd file (e.g. eml.cd)")
    ap.add_argument("--syntax", help="lemma syntax .cd file (e.g. esl.cd)")
    ap.add_argument("--head-col", type=int, default=1,
                    help="orthography column in the phonology file")
    ap.add_argument("--disc-col", type=int, default=5,
                    help="first DISC transcription column")
    ap.add_argument("--morph-col", type=int, default=3,
                    help="MorphStatus column in the morphology file")
    ap.add_argument("--class-col", type=int, default=3,
                    help="ClassNum column in the syntax file")
    ap.add_argument("--output", required=True, help="normalized TSV path")
    args = ap.parse_args(argv)

    morph = load_join(args.morphology, args.morph_col, "MorphStatus")
    syntax = load_join(args.syntax, args.class_col, "ClassNum")

    written = skipped = 0
    with open(args.output, "w", encoding="utf-8") as out:
        for line_no, cols in read_cd(args.phonology):
            if len(cols) <= max(args.head_col, args.disc_col):
                print(f"{args.phonology}:{line_no}: too few columns, skipped",
                      file=sys.stderr)
                skipped += 1
                continue
            id_num = cols[0]
            orth = cols[args.head_col]
            transcription = disc_to_symbols(cols[args.disc_col])
            if not orth or not transcription:
                skipped += 1
                continue
            status_code = morph.get(id_num, "M")
            morph_status = "mono" if status_code in ("M", "Z") else "multi"
            zero_flag = "1" if status_code == "Z" else "0"
            pos = CLASS_NUM_POS.get(syntax.get(id_num, ""), "UNK")
            out.write("\t".join([orth, transcription, morph_status,
                                 zero_flag, f"celex:{id_num}", pos]) + "\n")
            written += 1

    print(f"wrote {written} rows to {args.output} ({skipped} skipped)",
          file=sys.stderr)
    if args.morphology is None:
        print("warning: no --morphology file; every row marked mono "
              "with the zero-derivation flag down", file=sys.stderr)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
