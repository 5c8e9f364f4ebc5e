# Regenerates demo.csv: 400 rows, roughly 30% churn, a few missing cells.
import csv
import random

rng = random.Random(7)
with open("demo.csv", "w", newline="") as f:
    w = csv.writer(f, lineterminator="\n")
    w.writerow(["id", "tenure_months", "monthly_charge", "support_calls", "contract", "region", "noise", "outcome"])
    for i in range(400):
        tenure = rng.randint(1, 72)
        charge = round(rng.uniform(20, 120), 2)
        calls = rng.randint(0, 8)
        contract = rng.choice(["monthly", "monthly", "annual", "two_year"])
        region = rng.choice(["north", "south", "east", "west"])
        noise = round(rng.gauss(0, 1), 4)
        z = -0.05 * tenure + 0.02 * charge + 0.45 * calls + (1.2 if contract == "monthly" else -0.8) + rng.gauss(0, 0.8)
        y = "churn" if z > 3.0 else "stay"
        row = [i, tenure, charge, calls, contract, region, noise, y]
        if rng.random() < 0.03:
            row[rng.choice([1, 2, 4])] = "NA"
        w.writerow(row)
