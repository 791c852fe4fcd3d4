"""
End-to-end campaigns from apps/gonemax-lab/config. These are the long Monte Carlo runs,
selected with `pytest -m slow`.
"""

from pathlib import Path

import pytest

from core.python.rcga_pipeline.artifacts_core import read_summary
from core.python.rcga_pipeline.campaign_config import load_experiment_config
from core.python.rcga_pipeline.campaign_core import EXIT_SUCCESS, run_campaign

CONFIG_DIR = Path(__file__).resolve().parents[3] / "apps" / "gonemax-lab" / "config"

pytestmark = pytest.mark.slow


@pytest.mark.parametrize("name", [
    "run_small",
    "exactness",
    "optimization_success",
    "drift_neutral",
    "scaling_r8",
    "phases_r16",
    "verify_all",
])
def test_campaign_passes_its_acceptance_checks(name, tmp_path):
    config = load_experiment_config(str(CONFIG_DIR / f"{name}.py"))
    outcome = run_campaign(config, str(tmp_path), threads=config.threads or 1)
    assert outcome.exit_code == EXIT_SUCCESS, outcome.checks
    assert read_summary(tmp_path / "summary.txt")["status"] == "passed"


def test_verify_all_reports_every_oracle(tmp_path):
    config = load_experiment_config(str(CONFIG_DIR / "verify_all.py"))
    outcome = run_campaign(config, str(tmp_path))
    lines = (tmp_path / "verify.csv").read_text(encoding="utf-8").splitlines()
    oracles = {line.split(",", 1)[0] for line in lines[1:]}
    assert {"convolution", "variance", "variance-uniform-exact", "biased-window", "neutral-concentration",
            "reinforced-bernoulli", "drift-lower-suffix", "drift-upper-suffix", "large-biased-probability",
            "multiplicative-drift", "random-walk-contribution"} == oracles
    assert outcome.summary["violations"] == 0
