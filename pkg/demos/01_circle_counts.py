"""How many times does a random trigonometric polynomial cross a level?

A random element of span{cos kt, sin kt} is drawn from the natural measure
of its coefficient norm, together with a random level.  The average number
of crossings on the circle is compared with half the volume of the field
of cotangent fiber bodies, which for frequency k is 2*pi*k.

Run:  python demos/01_circle_counts.py
"""
from math import pi

from bkklab import get_scenario
from bkklab.solver import estimate_average, mixed_volume_side

print("frequency   Monte-Carlo average      mixed-volume side   2*pi*k")
for k in (1, 2, 3):
    sc = get_scenario(f"circle-k{k}")
    rep = estimate_average(sc, samples=50_000)
    rhs, _, _ = mixed_volume_side(sc)
    print(f"{k:>9}   {rep.estimate:8.4f} +- {rep.stderr:.4f}    {rhs:12.6f}   {2 * pi * k:8.4f}")

# Restricting to half the circle halves both sides.
half = get_scenario("circle-half")
rep = estimate_average(half, samples=50_000)
rhs, _, _ = mixed_volume_side(half)
print(f"\nupper half circle: average {rep.estimate:.4f} +- {rep.stderr:.4f}, "
      f"mixed-volume side {rhs:.6f} (pi = {pi:.6f})")

# A coefficient norm whose unit ball is a slightly rounded square.  There is
# no closed form here; the two sides still have to agree.
sq = get_scenario("circle-linf-smoothed")
rep = estimate_average(sq, samples=50_000)
rhs, _, _ = mixed_volume_side(sq)
print(f"rounded-square norm: average {rep.estimate:.4f} +- {rep.stderr:.4f}, "
      f"mixed-volume side {rhs:.4f}, z = {(rep.estimate - rhs) / rep.stderr:+.2f}")
