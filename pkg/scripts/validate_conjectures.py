#!/usr/bin/env python3
"""Check the closed-form precision matrix and the higher-order split representation
over the full (n, k) grid, optionally also with a finite large weight.

    python scripts/validate_conjectures.py --n-max 11 --out conjectures.json
"""
import argparse
import json
import sys
from dataclasses import dataclass

from kernelshapiq.benchmark import validate_conjecture_inverse, validate_conjecture_sii


@dataclass(frozen=True)
class ValidationConfig:
    n_min: int = 2
    n_max: int = 11
    n_soums: int = 10
    m_terms: int = 1000
    seed: int = 0
    mu_inf: float = 1e7
    with_finite: bool = False


def main() -> int:
    d = ValidationConfig()
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--n-min", type=int, default=d.n_min)
    p.add_argument("--n-max", type=int, default=d.n_max)
    p.add_argument("--n-soums", type=int, default=d.n_soums)
    p.add_argument("--m-terms", type=int, default=d.m_terms)
    p.add_argument("--seed", type=int, default=d.seed)
    p.add_argument("--mu-inf", type=float, default=d.mu_inf)
    p.add_argument("--with-finite", action="store_true", help="also report the split check at finite mu_inf")
    p.add_argument("--out")
    a = p.parse_args()
    config = ValidationConfig(a.n_min, a.n_max, a.n_soums, a.m_terms, a.seed, a.mu_inf, a.with_finite)

    grid = (config.n_min, config.n_max)
    reports = [
        validate_conjecture_inverse(grid, config.mu_inf),
        validate_conjecture_sii(grid, config.n_soums, config.m_terms, config.seed, config.mu_inf),
    ]
    if config.with_finite:
        # informational: the finite-weight bias grows with the SOUM values
        reports.append(validate_conjecture_sii(grid, config.n_soums, config.m_terms, config.seed, config.mu_inf, limit=False))
    for report in reports:
        print(report.table(), end="\n\n")
    if a.out:
        with open(a.out, "w") as fh:
            json.dump([r.to_dict() for r in reports], fh, indent=1)
    return 0 if all(r.passed for r in reports[:2]) else 1


if __name__ == "__main__":
    sys.exit(main())
