"""
Agreement and comparison statistics
==================================
"""

from ideaforge.metrics import krippendorff_alpha, pearson, win_rate_ztest

# four raters, twelve units, nominal codes; one unit has a single rating
# and drops out of the pairable pool
ratings = [
    [1, 1, None, 1],
    [2, 2, 3, 2],
    [3, 3, 3, 3],
    [3, 3, 3, 3],
    [2, 2, 2, 2],
    [1, 2, 3, 4],
    [4, 4, 4, 4],
    [1, 1, 2, None],
    [2, 2, 2, 2],
    [None, 4, 4, 4],
    [None, None, None, 1],
    [3, 3, 4, 3],
]
print("alpha =", krippendorff_alpha(ratings))
print("alpha, perfect agreement =", krippendorff_alpha([[1, 1], [2, 2], [1, 1]]))
print("alpha, coin flips =", round(krippendorff_alpha([[1, 2], [2, 1], [1, 2], [2, 1]]), 4))

# win counts from repeated head-to-head comparisons
for wins in [(60, 34), (8, 2), (5, 5)]:
    r = win_rate_ztest(*wins)
    print(f"wins {wins}: z = {r.z:.4f}  p = {r.p:.4f}")

xs = [1.0, 2.0, 3.0, 4.0]
print("pearson =", pearson(xs, [1.0, 2.0, 3.0, 5.0]))
print("pearson, affine =", pearson(xs, [2.0 * v + 1.0 for v in xs]))
