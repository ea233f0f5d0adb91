"""Monotone transport between the Gaussian and its truncated shifts.

The maps and their derivatives admit closed forms through the normal CDF;
five rational tail levels pin the constants that certify the derivative
bounds on the verification boxes.
"""
import numpy as np

from simplexstab import transport as tr

tc = tr.tail_constants()
print("tail constants (each bracketed to a hundredth):")
for name, value in tc.items():
    lo, hi = tr.TAIL_BRACKETS[name]
    print(f"  {name:5s} = {value:.9f}   in ({lo}, {hi})")

print("\nexact identities tying the inverse map to the tail constants:")
print(f"  psi_0(0)         = {tr.psi(0.0, 0.0):.9f}  (= alpha)")
print(f"  psi_0(gamma)     = {tr.psi(0.0, tc['gamma']):.9f}  (= delta)")
print(f"  psi_gamma(0)     = {tr.psi(tc['gamma'], 0.0):.9f}  (= gamma + beta)")
print(f"  psi_gamma(gamma) = {tr.psi(tc['gamma'], tc['gamma']):.9f}  (= gamma + xi)")

s, x = 0.1, 0.75
val, first, second = tr.phi_derivs(s, np.array([x]))
print(f"\nforward map at s = {s}, x = {x}:")
print(f"  phi = {val[0]:.6f}, phi' = {first[0]:.6f}, phi'' = {second[0]:.6f}")

margins = tr.derivative_box_margins(grid=200)
print("\nworst values of the certified bounds over the 200x200 boxes:")
for name, payload in margins.items():
    if name == "ok":
        continue
    worst, margin = payload
    print(f"  {name:18s} worst {worst:+.4f}   margin {margin:+.4f}")
print("all bounds hold:", margins["ok"])

rep = tr.psi_shift_monotonicity_check(np.linspace(0, 0.15, 9),
                                      [0.0, 0.05, 0.1, 0.15])
print("\nshift monotonicity of the inverse map:", rep)
