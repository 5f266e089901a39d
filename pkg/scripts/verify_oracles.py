import logging
import os
import statistics
import sys

import numpy as np

# Ensure app is in path
sys.path.append(os.getcwd())

from app.models import GeneratorSpec
from app.services.estimators import SIZE_METHODS, edge_estimate, estimate_size, return_time_estimate
from app.services.generators import generate
from app.services.walkers import ReturnRecord

# Configure Logging to console
logging.basicConfig(
    level=logging.INFO, format="%(asctime)s - %(name)s - %(levelname)s - %(message)s"
)
logger = logging.getLogger("VERIFIER")


def rel_err(estimate: float, truth: float) -> float:
    return abs(estimate - truth) / truth * 100


def verify_formulas() -> bool:
    logger.info("--- 1. Closed-form oracles ---")
    ok = True
    m_hat = edge_estimate(1000.0, np.array([4.0, 6.0]))
    if m_hat != 2500.0:
        logger.error(f"edge estimate gave {m_hat}, expected 2500")
        ok = False
    rec = ReturnRecord(
        source=0,
        source_weight=20.0,
        return_times=np.full(10, 100),
        degrees=np.zeros(0),
        weights=np.zeros(0),
    )
    n_hat = return_time_estimate(rec)
    if n_hat != 100.0:
        logger.error(f"return-time estimate gave {n_hat}, expected 100")
        ok = False
    if ok:
        logger.info("Formulas match: m=2500, n=100")
    return ok


def verify_uniform_er(trials: int = 10) -> bool:
    logger.info("--- 2. Uniform capture-recapture on ER(5000) ---")
    errors = []
    for seed in range(trials):
        g, _ = generate(GeneratorSpec(family="ER", size=5000, seed=seed))
        est = estimate_size(g, "uniform", seed=seed)
        if est.status == "ok":
            errors.append(rel_err(est.n_hat, g.node_count))
    if not errors:
        logger.error("Every uniform estimate failed")
        return False
    median = statistics.median(errors)
    logger.info(f"Median node error {median:.2f}% over {len(errors)} graphs")
    return median <= 10.0


def verify_mh_ba(trials: int = 10) -> bool:
    logger.info("--- 3. MH capture-recapture on BA(5000) ---")
    errors = []
    for seed in range(trials):
        g, _ = generate(GeneratorSpec(family="BA", size=5000, attach=3 + seed % 3, seed=seed))
        est = estimate_size(g, "mh", seed=seed)
        if est.status == "ok":
            errors.append(rel_err(est.n_hat, g.node_count))
    if len(errors) < trials:
        logger.warning(f"{trials - len(errors)} MH estimates failed")
    if not errors:
        return False
    median = statistics.median(errors)
    logger.info(f"Median node error {median:.2f}% over {len(errors)} graphs")
    return median <= 20.0


def survey_methods(size: int = 2000) -> None:
    logger.info(f"--- 4. Method survey on ER({size}), budget 0.5 ---")
    g, _ = generate(GeneratorSpec(family="ER", size=size, seed=1))
    for method in SIZE_METHODS:
        est = estimate_size(g, method, budget_fraction=0.5, seed=3)
        if est.status != "ok":
            logger.warning(f"{method}: failed ({est.diagnostics.get('error')})")
            continue
        logger.info(
            f"{method}: n_hat={est.n_hat:.0f} ({rel_err(est.n_hat, g.node_count):.1f}%), "
            f"m_hat={est.m_hat:.0f} ({rel_err(est.m_hat, g.edge_count):.1f}%)"
        )


def main():
    passed = verify_formulas()
    passed = verify_uniform_er() and passed
    passed = verify_mh_ba() and passed
    survey_methods()
    if passed:
        logger.info("All oracle checks passed.")
    else:
        logger.error("Some oracle checks failed.")
        sys.exit(1)


if __name__ == "__main__":
    main()
