"""
Scoring a single image by hand
==============================

Builds one image with two annotated boxes, then compares a few sets of
model predictions against it. Each variant plants one kind of label
problem and shows which subtype score reacts.
"""

import numpy as np

from labelaudit.dataset import AnnotatedBox, ImageRecord, PredictedBox
from labelaudit.geometry import BoundingBox, ImageDims, similarity
from labelaudit.objectlab import ScoringConfig, objectlab_score, softmin

dims = ImageDims(200, 200)
cat = AnnotatedBox(BoundingBox(20, 20, 80, 90), class_id=0)
dog = AnnotatedBox(BoundingBox(120, 100, 180, 170), class_id=1)

# %%
# Similarity mixes a corner kernel with IoU. The kernel term keeps boxes
# that do not overlap at all distinguishable from each other.
near = BoundingBox(85, 20, 145, 90)
far = BoundingBox(140, 130, 200, 200)
print("similarity, touching neighbour:", similarity(cat.box, near, dims))
print("similarity, far corner        :", similarity(cat.box, far, dims))

# %%
# Softmin pooling leans towards the worst box without ignoring the rest.
q = np.array([1.0, 1.0, 0.2])
for t in (0.1, 1.0, 10.0):
    print(f"softmin T={t:>4}: {softmin(q, t):.4f}   (mean {q.mean():.4f}, min {q.min():.1f})")

# %%
# A model that agrees with the labels, then four ways of disagreeing.
cfg = ScoringConfig()
sim_star = 0.0  # smallest pairwise similarity in the dataset; 0 is a safe floor here


def perfect_preds():
    return [PredictedBox(cat.box, 0, 0.99), PredictedBox(dog.box, 1, 0.99)]


variants = {
    "agrees": perfect_preds(),
    "label swapped": [PredictedBox(cat.box, 1, 0.99), PredictedBox(dog.box, 1, 0.99)],
    "box shifted": [PredictedBox(BoundingBox(45, 40, 105, 110), 0, 0.99), PredictedBox(dog.box, 1, 0.99)],
    "extra object": perfect_preds() + [PredictedBox(BoundingBox(100, 10, 150, 60), 0, 0.99)],
}

print(f"\n{'variant':<14} {'score':>7} {'badloc':>7} {'swap':>7} {'overlook':>9}")
for name, preds in variants.items():
    img = ImageRecord("demo", dims, (cat, dog), tuple(preds))
    s = objectlab_score(img, cfg, sim_star)
    print(f"{name:<14} {s.score:7.4f} {s.badloc:7.4f} {s.swap:7.4f} {s.overlook:9.4f}")
