import shutil
import subprocess

import pytest


@pytest.fixture(scope="session")
def engine_cli() -> str:
    path = shutil.which("curvecast")
    if path is None:
        pytest.fail("curvecast CLI not on PATH; install the engine package first")
    return path


@pytest.fixture(scope="session")
def run_cli(engine_cli):
    def run(*args: str) -> str:
        proc = subprocess.run(
            [engine_cli, *args], capture_output=True, text=True, timeout=120
        )
        if proc.returncode != 0:
            pytest.fail(f"curvecast {' '.join(args)} failed: {proc.stderr}")
        return proc.stdout

    return run
