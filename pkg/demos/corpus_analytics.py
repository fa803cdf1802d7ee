"""
Descriptive analytics over disaster corpora
===========================================

How tweets split across disasters and sentiment, and how each disaster's
tweets break down by need category and by day.
"""
from disaster_tweets import analytics as an
from disaster_tweets.corpus import load_registry
from disaster_tweets.synthetic import disaster_corpus

registry = load_registry()
group = [disaster_corpus(registry[d], 200 + 50 * i, seed=i)
         for i, d in enumerate(registry.groups["hurricanes"])]

shares = an.proportions_by_disaster(group)
for d in shares.keys:
    print(f"{d:>14}  {shares.count(d):5d} tweets  {shares.percent(d):3d}%")

harvey = next(ds for ds in group if ds.spec.disaster_id == "harvey_2017")
print("negative share", round(an.sentiment_proportions(harvey).share(1), 3))
print("modal need", an.need_breakdown(harvey).modal())

attitude = an.attitude_by_need(harvey)
print({k: None if v is None else round(v, 2) for k, v in an.negative_share_by_need(attitude).items()})
print("most negative need", an.most_negative_need(attitude))

daily = an.daily_volume(harvey)
print("tweets before/during/after", an.phase_totals(daily))
print("excluded", daily.notes)
