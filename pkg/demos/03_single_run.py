"""One full system run on the depth-3 deployment.

Simulates 2 s of the eight-vessel network hanging off a single shore donor
(three backhaul tiers), then prints the per-direction delivery statistics and
the radio picture per backhaul link: note the corridor-aligned links at the
far tier picking up donor interference, and the donor links staying clean.

Run:  python demos/03_single_run.py   (about ten seconds)
"""

import numpy as np

from seahaul import engine, metrics, scenario

scn = scenario.builtin_topology(3, duration_s=2.0, seed=1)
print(f"Scenario {scn.name}: {len(scn.nodes)} nodes, max depth {scn.max_depth()}, "
      f"{scn.traffic.dl_rate_bps / 1e6:.0f} Mb/s DL per vessel, pattern {scn.slot_pattern.name}")
result = engine.run(scn)

print()
print("Delivery summary (after the 10% warm-up window):")
for row in metrics.summarize(result):
    if row["kind"] == "direction":
        lat = row["latency_p50_ms"]
        print(f"  {row['direction'].upper()}: PDR {row['pdr']:.4f}, median latency "
              f"{lat:.3f} ms over {row['generated']} packets")

print()
print("Backhaul links (downlink direction, medians over the run):")
print(f"{'link':>10} {'PL [dB]':>9} {'SNR [dB]':>9} {'SINR [dB]':>10} {'interference':>13}")
tape = result.tapes["dl"]
slots = result.recorded_slots("dl")
for i, (tx, rx) in enumerate(tape.edges):
    snr = float(np.median(tape.snr_db[i, slots]))
    sinr = float(np.median(result.sinr_db["dl"][i, slots]))
    inter = result.interference_dbm["dl"][i, slots]
    inter = inter[~np.isnan(inter)]
    label = f"{np.median(inter):8.1f} dBm" if inter.size else "none"
    pl = float(np.median(tape.pl_db[i, slots]))
    print(f"{tx:>4} -> {rx:<3} {pl:9.2f} {snr:9.2f} {sinr:10.2f} {label:>13}")
