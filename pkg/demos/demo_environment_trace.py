"""Step the simulator by hand and watch every flow in the chain.

Demand and order noise are switched off, so each period is a plain
arithmetic consequence of the event order: arrivals, consumer demand,
reorder check, warehouse shipment, factory shipment, production, and
holding/stockout accounting.
"""

from safestock import ActionVector, ChainConfig, EnvState, clip_action, new_env

config = ChainConfig.for_case(1, demand_var=0.0, order_std=0.0)
env = new_env(config, seed=0)
env.reset()
env.state = EnvState(t=0, inv_factory=5, inv_warehouse=8, inv_retailer=6, rp=6)

print(f"start: {env.state}")
print()

actions = [(4, 3, 6), (0, 0, 5), (30, 1, 0), (0, 0, 0)]
incoming = 0
for raw in actions:
    action = clip_action(env.state, raw, incoming, config)
    out = env.step(action)
    s = out.next_state
    print(f"period {s.t - 1}: raw={raw} clipped=({action.q_factory}, "
          f"{action.q_warehouse}, {action.rp_next})")
    print(f"  demand={out.incoming.demand} retailer_order={out.incoming.to_warehouse} "
          f"shipped wr={out.shipped_to_retailer} fw={out.shipped_to_warehouse}")
    print(f"  inventories f/w/r = {s.inv_factory}/{s.inv_warehouse}/{s.inv_retailer} "
          f"backlogs w/f = {s.backlog_w}/{s.backlog_f}")
    print(f"  pipelines wr={s.pipeline_wr} fw={s.pipeline_fw} "
          f"production={s.pipeline_production}")
    print(f"  reward = {out.reward:g}, stockouts = {out.stockout_units}")
    print()
    incoming = out.incoming.to_warehouse

print("conservation ledger after four periods:")
print(f"  {env.ledger}")
print()
print("Note the production of 30 in period 2: it lands on a factory that")
print("already holds 3 units, so 3 units overflow the capacity of 30 and")
print("are discarded (and accounted for in the ledger).")
