"""
Cross-validated grid search and ROC curves
==========================================

Search the default logistic-regression grid with stratified 5-fold
cross-validation, refit the winner and trace its ROC curve on held-out data.
"""
from disaster_tweets.corpus import load_registry, split_indices
from disaster_tweets.evaluate import grid_search, load_default_grids, roc_curve
from disaster_tweets.pipeline import dataset_tokens, fit_pipeline
from disaster_tweets.synthetic import disaster_corpus

spec = load_registry()["harvey_2017"]
ds = disaster_corpus(spec, 600, seed=1)
tokens, y = dataset_tokens(ds), ds.labels()
train, test = split_indices(y.tolist(), 0.30, 0)

grid = load_default_grids()["LR"]
result = grid_search("LR", grid, ([tokens[i] for i in train], y[train]), k=5, seed=0)
for i, cell in enumerate(result.cells):
    mark = "*" if i == result.best_index else " "
    print(f"{mark} {cell.config}  mean cv accuracy {cell.mean_accuracy:.3f}")

model = fit_pipeline("LR", result.best_config, [tokens[i] for i in train], y[train], seed=0)
curve = roc_curve(model.scores([tokens[i] for i in test]), y[test])
print(f"test auc {curve.auc:.3f} over {len(curve.points)} roc points")

# the curve is invariant to any monotone rescaling of the scores
print(roc_curve(3 * model.scores([tokens[i] for i in test]) + 1, y[test]).auc == curve.auc)
