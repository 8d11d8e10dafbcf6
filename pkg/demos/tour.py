"""A short walk through the package on the standard examples.

Run with ``python3 demos/tour.py``.  Everything printed is exact.
"""

import random

from hamsec.classify import classify_section
from hamsec.generators import disguise_exact, random_section
from hamsec.jets import Chart
from hamsec.moduli import assemble_moduli, validate_template
from hamsec.normalize import reduce_to_preliminary, verify_preliminary
from hamsec.parsing import parse_map, parse_polynomial
from hamsec.poisson import first_nonvanishing, flow_tangency_oracle
from hamsec.whitney import MapJet, reduce_R_omega, whitney_classify

full = Chart.full(1)

# the Melrose glancing section: a fold, S(1,1)
h = parse_polynomial("x^2 + y + p1", full, 6)
cls = classify_section(h)
print("Melrose:", cls.name, {c: str(v) for c, v in cls.witnesses})

# the cusp, and the two independent ways of reading off k
cusp = parse_polynomial("x^3 + q1*x + p1", full, 6)
y = parse_polynomial("y", full, 6)
print("cusp:", classify_section(cusp).name,
      "k by brackets", first_nonvanishing(y, cusp)[0],
      "k by flow", flow_tangency_oracle(y, cusp, 5))

# a unit in front does not change the class; preparation strips it
h = parse_polynomial("(1 + x)*(x^3 + q1*x + p1)", full, 7)
nf = reduce_to_preliminary(h)
print("prepared:", [str(r) for r in nf.R], verify_preliminary(h, nf))

# Whitney maps in the reduced space
r = MapJet(parse_map("p1; q1^2 + p2; p2; q2", Chart.reduced(2), 6))
wc = whitney_classify(r)
mod, phi = reduce_R_omega(r)
print("fold map: s =", wc.s, "r1j =", [str(j) for j in mod.r1j])

# moduli survive a random change of coordinates and unit
rng = random.Random(2024)
h1, _ = random_section(1, 1, 1, 8, rng)
h2, _, _ = disguise_exact(h1, 1, 8, rng)
m1, m2 = assemble_moduli(h1), assemble_moduli(h2, N=8)
order = min(6, m1.valid_order, m2.valid_order)
print("moduli agree to order", order, ":", m1.equal_to_order(m2, order))
print("template ok:", validate_template(m1)["ok"])
