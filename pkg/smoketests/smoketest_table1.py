import logging
from pathlib import Path

from cnjgcy.experiments import assemble_table, run_plan, table1_plan

# a few replicates with short training; the table layout and cell rules
# are what matter here, not the errors themselves
if __name__ == "__main__":
    logging.basicConfig(format="%(asctime)s/%(levelname)s - %(message)s", datefmt='%Y-%m-%d %H:%M:%S')
    logging.getLogger().setLevel("INFO")

    plan = table1_plan(seed_base=20190801, replicates=2, output=Path("scratch/table1"), n=100,
                       overrides={"epochs": 20, "layer_width": 16})
    print(plan.describe())
    runs = run_plan(plan, n_jobs=-1)
    table = assemble_table(runs)
    print(table.to_string(index=False))
    print(runs.groupby("status").size())
