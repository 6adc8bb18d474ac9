"""Desk-scale Monte Carlo study on the benchmark model.

Each replication draws independent train and test sets, selects variables
on the training data, refits least squares on the selected columns and
scores prediction error on the test data.  The irreducible error is
tr(noise_cov) = 2.5, so the informative column is the excess over a fit on
the true active set, which shrinks as n grows.
"""

from covsel import PenaltySchedule, SimulationConfig, run_study

cfg = SimulationConfig(
    sample_sizes=(50, 100, 500, 2000),
    replications=100,
    base_seed=20240817,
    parallel=True,
)
summary = run_study(cfg)

print("default schedule, 100 replications per sample size:")
print(f"  {'n':>5} {'mean err':>10} {'oracle err':>11} {'excess':>9} {'correct':>8} {'failed':>7}")
for row in summary.rows:
    print(
        f"  {row.n:>5} {row.mean_pred_error:>10.4f} {row.mean_oracle_error:>11.4f} "
        f"{row.mean_excess_error:>9.5f} {row.correct_rate:>8.2f} {row.failures:>7}"
    )
print()
print("prediction error sits on the 2.5 noise floor and the excess decays")
print("like 1/n even though the default schedule keeps every variable.")
print()

cfg2 = SimulationConfig(
    sample_sizes=(50, 100, 500, 2000),
    replications=100,
    base_seed=20240817,
    pen=PenaltySchedule(g_rate=0.4),
    penalty_arg="rank",
    parallel=True,
)
summary2 = run_study(cfg2)
print("g rate 0.4, rank-argument penalties (consistent regime):")
print(f"  {'n':>5} {'mean err':>10} {'excess':>9} {'correct':>8}")
for row in summary2.rows:
    print(
        f"  {row.n:>5} {row.mean_pred_error:>10.4f} "
        f"{row.mean_excess_error:>9.5f} {row.correct_rate:>8.2f}"
    )
