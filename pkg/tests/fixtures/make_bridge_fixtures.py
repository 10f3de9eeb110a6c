"""Regenerate the bridge replay fixtures from tests/bridge_cases.py."""
import sys
from pathlib import Path

HERE = Path(__file__).resolve().parent
sys.path.insert(0, str(HERE.parent))

from bridge_cases import all_requests  # noqa: E402
from pathforge.llm_bridge import write_fixture  # noqa: E402

if __name__ == "__main__":
    out = HERE / "bridge"
    for old in out.glob("*.json"):
        old.unlink()
    for name, request, replies in all_requests():
        path = write_fixture(out, request, replies)
        print(f"{name}: {path.name}")
