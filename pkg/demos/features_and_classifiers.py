"""
From tweets to tf-idf vectors to eight classifiers
==================================================

Look at the tf-idf weights of a tokenized corpus, including the negative weight
a term gets when it appears in every document, then compare every classifier
family on a 30/70 split.
"""
import numpy as np

from disaster_tweets.corpus import split_indices
from disaster_tweets.evaluate import roc_curve
from disaster_tweets.features import TfidfConfig
from disaster_tweets.models import FAMILIES
from disaster_tweets.pipeline import dataset_tokens, fit_pipeline
from disaster_tweets.preprocess import preprocess_text
from disaster_tweets.synthetic import separable_corpus

# preprocessing lowercases, strips urls and mentions, drops stopwords and stems
print(preprocess_text("Flooded streets near @cityhall, we NEED drinking water http://t.co/x"))

# idf ln(n / (1 + df)) is negative for a term present in every document
docs = [("water", "flood"), ("water",), ("water", "shelter", "shelter")]
cfg = TfidfConfig()
vocab = cfg.fit(docs)
print(vocab.terms)
print(np.round(cfg.transform(docs, vocab).toarray(), 3))

# a corpus whose two classes use disjoint vocabularies
ds = separable_corpus(200, seed=0)
tokens, y = dataset_tokens(ds), ds.labels()
train, test = split_indices(y.tolist(), 0.30, 0)
train_docs, test_docs = [tokens[i] for i in train], [tokens[i] for i in test]

# naive Bayes needs non-negative weights, so it uses the smoothed idf
configs = {"NB": {"idf": "smooth"}}
for family in FAMILIES:
    model = fit_pipeline(family, configs.get(family), train_docs, y[train], seed=0)
    acc = np.mean(model.predict(test_docs) == y[test])
    auc = roc_curve(model.scores(test_docs), y[test]).auc
    print(f"{family:>8}  accuracy {acc:.3f}  auc {auc:.3f}")
