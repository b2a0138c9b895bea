"""The ML paradigm: cluster trips, then classify them, straight from SQL.

Relations flow into estimators as dense float matrices and come back as
relations with prediction columns appended, so the output can be grouped,
joined, or exported like any other table.
"""
from pathlib import Path

from polyquery import Engine, kmeans_predict, kmeans_train, relation_to_matrix
from polyquery.cli import format_table
from polyquery.ml import logreg_predict, logreg_train

DATA = Path(__file__).resolve().parent.parent / "data"
engine = Engine(DATA)

training = engine.query(
    "SELECT trip_id, distance_km, duration_min, fare FROM trips WHERE fare > 0"
)
matrix, _ = relation_to_matrix(training, ["distance_km", "duration_min", "fare"])

model = kmeans_train(matrix, k=3, max_iter=100, tol=1e-4, seed=7)
print(f"k-means: {model.k} clusters, inertia={model.inertia:.1f}, "
      f"{model.iterations_run} moving iterations")
for i, c in enumerate(model.centroids):
    print(f"  centroid {i}: distance={c[0]:.2f} km, duration={c[1]:.2f} min, fare={c[2]:.2f}")

clustered = kmeans_predict(model, matrix)
print("\nCluster sizes:")
sizes: dict[int, int] = {}
for row in clustered.rows():
    sizes[row[-1]] = sizes.get(row[-1], 0) + 1
print(" ", dict(sorted(sizes.items())))

# Classification: predict whether a trip is "long" from distance alone.
# The label comes from a SQL expression, the model from gradient descent.
labeled = engine.query(
    "SELECT distance_km, fare, duration_min > 8.0 AS is_long "
    "FROM trips WHERE fare > 0"
)
features, labels = relation_to_matrix(labeled, ["distance_km", "fare"], label_col="is_long")
clf = logreg_train(features, labels, lr=0.05, epochs=400, seed=0)
print(f"\nlogistic regression: loss {clf.loss_history[0]:.4f} -> {clf.training_loss:.4f} "
      f"over {len(clf.loss_history) - 1} epochs")

predictions = logreg_predict(clf, features)
correct = sum(
    1
    for row in predictions.rows()
    if bool(row[predictions.schema.index_of("is_long")]) == bool(row[-1])
)
print(f"training accuracy: {correct}/{predictions.num_rows()}")
print()
print(format_table(predictions, limit=8))
