"""A shortened 10-fold run of the whole pipeline, written to demos/results/."""

from dataclasses import replace
from pathlib import Path

from credit_ensemble.evaluation import cross_validate, emit_report, load_run_config

HERE = Path(__file__).resolve().parent

cfg = load_run_config(HERE / "run_german_quick.json")
report = cross_validate(cfg)
for name, res in report.methods.items():
    print(f"{name:9s} mean {100 * res.mean_accuracy:6.2f}%  std {100 * res.std_accuracy:5.2f}")

written = emit_report(report, HERE / "results")
print("wrote", ", ".join(p.name for p in written))
print((HERE / "results" / "summary.csv").read_text())

# same config, different worker count: identical numbers
again = cross_validate(replace(cfg, workers=2))
assert again.methods["weighted"].fold_accuracies == report.methods["weighted"].fold_accuracies
