"""
Strict stability in miniature
=============================

Run a few seeded instances, then break canonical naming on purpose and
watch the checks notice.
"""

from extent import Config, check_stability, gen_instance, run_suite
from extent.canon import SITES, inject_fault

configs = [Config(base=b) for b in ("terminal", "arrow", "delta1")]
body = run_suite(configs, 12, seed=7)
print("instances:", body["summary"]["instances"], " violations:", body["summary"]["violations"])
for name, c in body["summary"]["counts"].items():
    print(f"  {name:<22} pass {c['pass']:>3}  skipped {c['skipped']:>3}")

# one instance, inspected
inst = gen_instance(4, Config(base="arrow"))
print("shape:", inst.shape_name, " Γ:", inst.gamma.sizes, " Δ:", inst.delta.sizes)
print({k: v for k, v in check_stability(inst).items()})

# rotate the canonical order at each construction site in turn
instances = [gen_instance(s, cfg) for cfg in configs for s in range(5)]
for site in SITES:
    caught = 0
    with inject_fault(site):
        for inst in instances:
            try:
                caught += any(v is False for v in check_stability(inst).values())
            except (KeyError, ValueError, IndexError):
                caught += 1
    print(f"fault at {site:<15} caught on {caught}/{len(instances)} instances")
