"""How the estimated criterion scales with sample size.

Two regimes: for a subset covering the active set the population criterion
is zero and sqrt(n) times the estimate stays bounded; for a subset missing
a relevant variable the estimate stabilizes at the positive population
value.
"""

from covsel import (
    VariableSubset,
    benchmark_model,
    convergence_probe,
    criterion,
    population_covariances,
)

model = benchmark_model()
suite = population_covariances(model)
grid = [250, 1000, 4000]

covering = VariableSubset((1, 4, 7), 7)
table = convergence_probe(model, covering, grid, reps=50, seed=11)
print("subset {1,4,7} covers the active set (population criterion = 0):")
print(f"  {'n':>5} {'median xi':>12} {'median sqrt(n) xi':>18}")
for pt in table.points:
    print(f"  {pt.n:>5} {pt.median_criterion:>12.5f} {pt.median_scaled_criterion:>18.4f}")
scaled = [pt.median_scaled_criterion for pt in table.points]
print(f"  scaled medians vary by a factor of {max(scaled) / min(scaled):.2f} only")
print()

missing = VariableSubset.full(7).drop(1)
target = criterion(suite, missing)
table2 = convergence_probe(model, missing, grid, reps=50, seed=12)
print("subset without variable 1 (population criterion = %.4f):" % target)
print(f"  {'n':>5} {'median xi':>12} {'relative gap':>13}")
for pt in table2.points:
    gap = abs(pt.median_criterion - target) / target
    print(f"  {pt.n:>5} {pt.median_criterion:>12.5f} {gap:>13.5f}")
