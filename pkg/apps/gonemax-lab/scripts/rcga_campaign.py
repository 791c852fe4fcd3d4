"""
G-OneMax lab campaign script.
Wrapper that loads an experiment config module and hands it to the core campaign runner.

Usage:
    python apps/gonemax-lab/scripts/rcga_campaign.py scaling --config apps/gonemax-lab/config/scaling_r8.py
"""

import argparse
import os
import sys
from datetime import datetime

# Add paths for imports
script_dir = os.path.dirname(os.path.abspath(__file__))
app_dir = os.path.dirname(script_dir)
repo_root = os.path.dirname(os.path.dirname(app_dir))

sys.path.insert(0, repo_root)

from core.python.shared.settings import get_log_level, get_output_dir, get_threads
from core.python.shared.shared_logger import logger, reconfigure_logger
from core.python.rcga_pipeline.campaign_config import EXPERIMENT_KINDS, load_experiment_config
from core.python.rcga_pipeline.campaign_core import exit_code_for, run_campaign
from core.python.rcga_pipeline.errors import InvalidParameterError

CONFIG_DIR = os.path.join(app_dir, 'config')
LOGS_DIR = os.path.join(app_dir, 'logs')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="r-cGA experiment campaigns on multi-valued OneMax")
    subcommands = parser.add_subparsers(dest="kind", required=True)
    for kind in EXPERIMENT_KINDS:
        sub = subcommands.add_parser(kind, help=f"{kind} campaign")
        sub.add_argument("--config", required=True, help="experiment config module (.py)")
        sub.add_argument("--out", help="artifact directory (default: config OUTPUT_DIR, then RCGA_OUTPUT_DIR)")
        sub.add_argument("--seed", type=int, help="base seed; replica i uses seed + i")
        sub.add_argument("--threads", type=int, help="worker processes for independent replicas")
        sub.add_argument("--emit-plots", action="store_true", help="also write an SVG chart")
    return parser


def resolve_config_path(path: str) -> str:
    """Accept a path, or a bare config name from apps/gonemax-lab/config."""
    if os.path.exists(path):
        return path
    candidate = os.path.join(CONFIG_DIR, path if path.endswith(".py") else f"{path}.py")
    return candidate if os.path.exists(candidate) else path


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    # Dated log file next to the app, set up once per invocation
    log_file = os.path.join(LOGS_DIR, f'campaign_{datetime.now().strftime("%Y%m%d")}.log')
    reconfigure_logger(log_file_path=log_file, level=get_log_level())

    logger.info("=" * 60)
    logger.info(f"Starting r-cGA {args.kind} campaign")
    logger.info(f"Log file: {log_file}")
    logger.info("=" * 60)

    try:
        config = load_experiment_config(resolve_config_path(args.config), kind=args.kind)
        if args.seed is not None:
            if args.seed < 0:
                raise InvalidParameterError(f"--seed must be non-negative, got {args.seed}")
            config.base_seed = args.seed
        threads = args.threads or config.threads or get_threads()
        out_dir = args.out or config.output_dir or os.path.join(get_output_dir(), config.name)

        outcome = run_campaign(config, out_dir, threads=max(1, threads), emit_plots=args.emit_plots)
        logger.info("=" * 60)
        logger.info(f"Campaign artifacts in {out_dir} (exit status {outcome.exit_code})")
        logger.info("=" * 60)
        return outcome.exit_code
    except Exception as e:
        code = exit_code_for(e)
        logger.error("=" * 60)
        logger.error(f"Campaign failed with error: {e}")
        logger.error("=" * 60)
        if code is None:
            raise
        return code


if __name__ == "__main__":
    sys.exit(main())
