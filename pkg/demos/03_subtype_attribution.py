"""
Which subtype catches which error?
==================================

Injects one error type at a time and reports the ranking quality of each
subtype score. Drops should show up in the overlooked column, swaps in the
swap column and shifted boxes in the bad-location column.
"""

from labelaudit.evaluator import average_precision
from labelaudit.injector import InjectionSpec, inject_errors
from labelaudit.objectlab import ScoringConfig, score_dataset
from labelaudit.synth import attach_predictions, make_synthetic_dataset, oracle_predictions

clean = make_synthetic_dataset(500, seed=0)
preds = oracle_predictions(clean, confidence=0.97, jitter=0.1, spurious_rate=0.02, seed=7)

print(f"{'injected':<10} {'overlook':>9} {'swap':>7} {'badloc':>7}")
for kind in ("drop", "swap", "shift"):
    probs = {k: float(k == kind) for k in ("drop", "swap", "shift")}
    spec = InjectionSpec(drop_prob=probs["drop"], swap_prob=probs["swap"], shift_prob=probs["shift"], seed=7)
    noisy, manifest = inject_errors(clean, spec)
    results = score_dataset(attach_predictions(noisy, preds), ScoringConfig())
    truth = manifest.truth()
    aps = [average_precision({r.image_id: getattr(r, col) for r in results}, truth)
           for col in ("overlook", "swap", "badloc")]
    print(f"{kind:<10} {aps[0]:9.4f} {aps[1]:7.4f} {aps[2]:7.4f}")

# %%
# With predictions identical to the clean labels, a swapped label also
# looks like a missed object of the predicted class, so the swap and
# overlooked columns tie. Model noise is what separates them.
exact = oracle_predictions(clean, confidence=0.99)
spec = InjectionSpec(drop_prob=0.0, swap_prob=1.0, shift_prob=0.0, seed=7)
noisy, manifest = inject_errors(clean, spec)
results = score_dataset(attach_predictions(noisy, exact), ScoringConfig())
for col in ("overlook", "swap"):
    ap = average_precision({r.image_id: getattr(r, col) for r in results}, manifest.truth())
    print(f"exact predictions, swap-only, {col}: {ap:.4f}")
