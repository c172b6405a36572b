"""
Command line
============

The same workflow through ``fvlab``. Each run ends with one
``RESULT key=value ...`` line that is easy to grep.
"""

import subprocess
import sys
import tempfile
from pathlib import Path

work = Path(tempfile.mkdtemp())


def fvlab(*args):
    cmd = [sys.executable, "-m", "fvlab", *args]
    print("$ fvlab", " ".join(args))
    proc = subprocess.run(cmd, capture_output=True, text=True, cwd=work)
    print(proc.stdout.strip() or proc.stderr.strip(), f"(exit {proc.returncode})\n")
    return proc


fvlab("mesh-gen", "--dim", "3", "--M", "8", "--mesh", "random", "--seed", "2", "--out", "m.txt")
(work / "p.json").write_text('{"name": "gaussian_cube", "params": {"c": 2.0}}')
fvlab("solve", "--mesh-file", "m.txt", "--params", "p.json", "--dump-solution", "u.csv")
print((work / "u.csv").read_text().splitlines()[0], "\n")
fvlab("study", "--dim", "2", "--solution", "difference:gaussian_cube:gaussian_cube",
      "--levels", "8,16,32", "--out", "study.csv", "--svg", "study.svg")
fvlab("verify", "--dim", "3", "--trials", "50", "--seed", "7", "--strict")

# usage errors exit with 1
fvlab("study", "--levels", "16,8")
