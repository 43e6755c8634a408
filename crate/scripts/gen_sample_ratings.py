"""Generate the synthetic ratings file for the bundled sample dataset.

Users get random genre affinities; movies get a latent quality and a
popularity weight. Output is deterministic for a given seed.
"""
import csv
import random
import sys
from pathlib import Path

SEED = 20180401
N_USERS = 60

root = Path(__file__).resolve().parent.parent / "crates/core/data/sample"
rng = random.Random(SEED)

movies = []
with open(root / "movies.csv", newline="", encoding="utf-8") as f:
    for row in csv.DictReader(f):
        genres = [] if row["genres"] == "(no genres listed)" else row["genres"].split("|")
        movies.append((int(row["movieId"]), genres))

all_genres = sorted({g for _, gs in movies for g in gs})
quality = {mid: rng.gauss(0.0, 0.6) for mid, _ in movies}
popularity = {mid: rng.paretovariate(1.5) for mid, _ in movies}

rows = []
ts = 1_400_000_000
for user in range(1, N_USERS + 1):
    affinity = {g: rng.gauss(0.0, 0.8) for g in all_genres}
    bias = rng.gauss(3.4, 0.35)
    n = rng.randint(15, 55)
    pool = [mid for mid, _ in movies]
    weights = [popularity[mid] for mid in pool]
    chosen = set()
    while len(chosen) < n:
        chosen.add(rng.choices(pool, weights)[0])
    for mid, genres in movies:
        if mid not in chosen:
            continue
        aff = sum(affinity[g] for g in genres) / max(1, len(genres))
        raw = bias + quality[mid] + aff + rng.gauss(0.0, 0.45)
        r = min(5.0, max(0.5, round(raw * 2) / 2))
        ts += rng.randint(30, 5000)
        rows.append((user, mid, r, ts))

out = root / "ratings.csv"
with open(out, "w", newline="", encoding="utf-8") as f:
    w = csv.writer(f, lineterminator="\n")
    w.writerow(["userId", "movieId", "rating", "timestamp"])
    for user, mid, r, t in rows:
        w.writerow([user, mid, f"{r:.1f}", t])
print(f"wrote {len(rows)} ratings to {out}", file=sys.stderr)
