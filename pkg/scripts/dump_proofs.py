"""Regenerate corpus/proofs from the derivation builders."""

from realmod.ehp import PROOF_DIR, build_library, canned_library, dump_library


def main() -> None:
    paths = dump_library(build_library())
    canned_library()        # round-trip: parse and compare against the law table
    print(f"wrote {len(paths)} derivations to {PROOF_DIR}")


if __name__ == "__main__":
    main()
