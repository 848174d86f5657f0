"""
End-to-end pipeline on a synthetic network
==========================================

Drive every pipeline stage through the command-line entry point:
generate a fixture network, ingest it, decompose each station, fit
families, compute the information metrics, grid them onto maps with a
shuffle significance test, and correlate metrics against terrain.

Everything lands in a temporary directory that is printed at the end.
"""

import tempfile
from pathlib import Path

from windinfo.cli import main

out = Path(tempfile.mkdtemp(prefix="windinfo_demo_"))
common = ["--out", str(out), "--seed", "11"]

steps = [
    ["synth", *common, "--n-stations", "30", "--years", "2",
     "--step-seconds", "21600"],
    ["ingest", *common, "--stations", str(out / "stations.csv"),
     "--measurements", str(out / "measurements")],
    ["decompose", *common],
    ["fitdist", *common, "--stations", str(out / "stations.csv")],
    ["fs", *common, "--stations", str(out / "stations.csv")],
    ["map", *common, "--stations", str(out / "stations.csv"),
     "--cellsize", "1000", "--shuffles", "199"],
    ["report", *common, "--stations", str(out / "stations.csv")],
]
for argv in steps:
    rc = main(argv)
    assert rc == 0, f"step {argv[0]} failed with exit code {rc}"

print("\nartifacts:")
for p in sorted(out.rglob("*")):
    if p.is_file():
        print(" ", p.relative_to(out))

print(f"\nrun directory: {out}")
print("inspect fs_results.csv and maps/shuffle_*.txt for the headline numbers")
