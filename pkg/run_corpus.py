"""Run the toolkit from a source checkout: ``python run_corpus.py describe --config ...``."""

import sys
from pathlib import Path

# Allow running without installing the package.
sys.path.insert(0, str(Path(__file__).resolve().parent))

from visual_clues.cli import main  # noqa: E402

if __name__ == "__main__":
    sys.exit(main())
