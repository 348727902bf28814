"""Quick check of the Python bindings.

Build first:  pip install --no-build-isolation -e crates/python
Then run:     python python/smoke_test.py
"""

import json

import virtknot_py as vk

trefoil = vk.GaussDiagram("long: O1+ U2+ O3+ U1+ O2+ U3+")
assert trefoil.is_realizable()
assert vk.v21(trefoil) == vk.v22(trefoil) == 1
assert vk.extend_v21(trefoil) == 1
assert vk.pairing("long: O1* U2* U1* O2*", trefoil) == 1

virtual = vk.GaussDiagram("closed: O1+ O2+ U1+ U2+")
assert not virtual.is_realizable()
assert vk.v3_closed(virtual) == 1
assert vk.v3_closed(trefoil.close_long()) == 0
assert vk.v3_closed(virtual.random_isotopy(30, seed=4)) == 1
assert vk.search(virtual, vk.GaussDiagram("closed:"), forbidden=True) is not None

cut_a = vk.GaussDiagram("long: O1+ U2+ U1+ O2+")
cut_b = vk.GaussDiagram("long: U1+ O2+ O1+ U2+")
assert vk.v22(cut_a) != vk.v22(cut_b)
assert cut_a.close_long() == cut_b.close_long()

fig = vk.GaussDiagram("closed: O1+ O2+ U1+ U3+ O4+ U2+ O3+ U4+")
assert vk.count_homs(fig) == 12 and vk.count_homs(fig, lower=True) == 6

terms = [(2, "closed: O1+ U2- O2- U1+"), (-1, "closed: O1+ U1+")]
canonical = sorted((k, vk.GaussDiagram(c).canonical_code()) for k, c in terms)
assert sorted(vk.subdiagram_expansion_inverse(vk.subdiagram_expansion(terms))) == canonical

assert vk.new_invariant_dimensions(3, "closed") == [(1, 0), (2, 0), (3, 1)]
q = vk.compute_quotient(2, "long")
assert json.loads(q)["degree_bound"] == 2
assert len(vk.universal_invariant(trefoil, q)) == 3

for coeff, code in vk.reduce_to_descending(vk.GaussDiagram("long: U1+ O1+"), 1):
    assert coeff in (1, -1) and code.startswith("long:")

try:
    vk.GaussDiagram("closed: O1+ U9+")
except ValueError:
    pass
else:
    raise AssertionError("bad code accepted")

print("smoke test passed")
