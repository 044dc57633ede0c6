"""Run every shipped config through the CLI and collect the summary lines.

    python3 scripts/reproduce_figures.py            # all figures
    python3 scripts/reproduce_figures.py fig2 fig5  # a subset
"""
import contextlib
import io
import sys
import time
from pathlib import Path

from jqfsim.cli import main
from jqfsim.config import parse_config

ROOT = Path(__file__).resolve().parent.parent
CONFIGS = ROOT / "configs"


def run(cfg_path):
    cfg = parse_config(cfg_path)
    buf = io.StringIO()
    t0 = time.time()
    with contextlib.redirect_stdout(buf):
        rc = main([cfg.experiment.name, "--config", str(cfg_path), "--jobs", "1"])
    return rc, buf.getvalue(), time.time() - t0


def main_(names):
    paths = sorted(CONFIGS.glob("*.cfg"))
    if names:
        paths = [p for p in paths if p.stem in names or p.stem.split("_")[0] in names]
    status = 0
    for p in paths:
        rc, out, wall = run(p)
        status |= rc
        print(f"== {p.name} (rc={rc}, {wall:.1f}s)")
        print(out.rstrip())
    return status


if __name__ == "__main__":
    sys.exit(main_(sys.argv[1:]))
