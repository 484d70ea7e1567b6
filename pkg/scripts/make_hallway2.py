"""Regenerate src/perseusfilter/data/hallway2.POMDP from the programmatic builder."""
from pathlib import Path

from perseusfilter.benchmarks import HALLWAY2_FILE_HEADER, build_hallway2
from perseusfilter.parser import write_pomdp

OUT = Path(__file__).resolve().parents[1] / "src" / "perseusfilter" / "data" / "hallway2.POMDP"

if __name__ == "__main__":
    OUT.write_text(write_pomdp(build_hallway2(), header=HALLWAY2_FILE_HEADER), encoding="utf-8")
    print(f"wrote {OUT}")
