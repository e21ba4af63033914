#!/usr/bin/env python3
# Copyright 2026 The fairimp Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Converts the raw UCI Adult and German Credit files into headered CSVs.

The output keeps every raw row (missing Adult cells stay as "?") so the
loader's drop_missing handling is what produces the analyzed row count.

Usage:
  prepare_uci.py --adult-data adult.data --adult-test adult.test \
                 --german german.data --out-dir data/
"""

import argparse
import csv
import os

ADULT_COLUMNS = [
    "age", "workclass", "fnlwgt", "education", "education_num",
    "marital_status", "occupation", "relationship", "race", "sex",
    "capital_gain", "capital_loss", "hours_per_week", "native_country",
    "income",
]

GERMAN_COLUMNS = [
    "checking_status", "duration_months", "credit_history", "purpose",
    "credit_amount", "savings", "employment_since", "installment_rate",
    "personal_status", "other_debtors", "residence_since", "property",
    "age", "installment_plans", "housing", "existing_credits", "job",
    "num_dependents", "telephone", "foreign_worker", "credit_risk",
]

# A92 and A95 are the female personal-status codes.
GERMAN_FEMALE = {"A92", "A95"}


def read_adult(path, skip_first):
  rows = []
  with open(path, newline="") as f:
    for i, line in enumerate(f):
      if skip_first and i == 0:
        continue
      line = line.strip()
      if not line:
        continue
      cells = [c.strip() for c in line.split(",")]
      if len(cells) != len(ADULT_COLUMNS):
        continue
      # adult.test spells the labels with a trailing period.
      cells[-1] = cells[-1].rstrip(".")
      rows.append(cells)
  return rows


def write_csv(path, header, rows):
  with open(path, "w", newline="") as f:
    w = csv.writer(f, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)


def main():
  p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
  p.add_argument("--adult-data")
  p.add_argument("--adult-test")
  p.add_argument("--german")
  p.add_argument("--out-dir", default="data")
  args = p.parse_args()
  os.makedirs(args.out_dir, exist_ok=True)

  if args.adult_data:
    rows = read_adult(args.adult_data, skip_first=False)
    if args.adult_test:
      rows += read_adult(args.adult_test, skip_first=True)
    write_csv(os.path.join(args.out_dir, "adult.csv"), ADULT_COLUMNS, rows)
    print(f"adult.csv: {len(rows)} rows")

  if args.german:
    rows = []
    with open(args.german) as f:
      for line in f:
        cells = line.split()
        if len(cells) != len(GERMAN_COLUMNS):
          continue
        cells[-1] = "good" if cells[-1] == "1" else "bad"
        sex = "female" if cells[8] in GERMAN_FEMALE else "male"
        rows.append(cells + [sex])
    write_csv(os.path.join(args.out_dir, "german.csv"),
              GERMAN_COLUMNS + ["sex"], rows)
    print(f"german.csv: {len(rows)} rows")


if __name__ == "__main__":
  main()
