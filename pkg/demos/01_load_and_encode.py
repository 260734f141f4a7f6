"""Parse the German credit file, encode it, and split it into folds."""

from pathlib import Path

import numpy as np

from credit_ensemble.dataset import encode, load_dataset, stratified_folds

DATA = Path(__file__).resolve().parent.parent / "data"

d = load_dataset(DATA / "german.data", "german")
print(len(d), "records, class counts (good, bad) =", d.class_counts())

# numeric attributes are min-max scaled, categorical ones one-hot coded
m = encode(d)
print("encoded width:", m.width)
print("first row, decoded back:", m.decode_row(m.rows[0])[:4], "...")

# where did each column come from?
for col in range(8, 12):
    src, code = m.column_map[col]
    print(f"column {col}: attribute {d.schema.attributes[src].name!r} code {code}")

folds = stratified_folds(d, k=10, seed=0)
print("fold sizes:", folds.fold_sizes())
test = folds.test_indices(0)
print("fold 0 has", np.sum(d.labels[test] == 1), "good and", np.sum(d.labels[test] == 0), "bad")
