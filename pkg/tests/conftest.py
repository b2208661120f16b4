import os
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

# Must be set before any package module configures logging.
os.environ.setdefault('SEPARATION_LOG_DIR', tempfile.mkdtemp(prefix='separation-log-'))
