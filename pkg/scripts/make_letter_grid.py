#!/usr/bin/env python3
"""Regenerate the bundled per-slot letter grid from the common-words list.

Run from the repository root after editing src/minsyn/data/common_words.txt:

    python scripts/make_letter_grid.py
"""

import json
from pathlib import Path

from minsyn.words import bundled_common_words, derive_letters_by_position


def main() -> None:
    grid = derive_letters_by_position(bundled_common_words())
    out = Path(__file__).resolve().parents[1] / "src" / "minsyn" / "data" / "letter_grid.json"
    out.write_text(json.dumps(
        {"letters_by_position": [list(g) for g in grid]}, indent=2) + "\n")
    print(f"wrote {out}")
    for k, letters in enumerate(grid):
        print(f"  position {k}: {' '.join(letters)}")


if __name__ == "__main__":
    main()
