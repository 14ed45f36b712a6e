#!/usr/bin/env python3
"""Regenerates headlines_1000.csv: 1,000 synthetic news headlines in five
themes (200 each), with a Label column. Output is deterministic."""
import csv
import io
import random
import sys

THEMES = {
    "Public health": {
        "subj": ["Hospitals", "Doctors", "Nurses", "Health officials", "Clinics", "Researchers"],
        "noun": ["vaccine", "virus", "masks", "infections", "testing", "pandemic", "outbreak",
                 "lockdown", "quarantine", "symptoms", "ventilators", "variant"],
        "verb": ["warn about", "prepare for", "report rising", "struggle with", "track",
                 "race to contain"],
    },
    "Economic consequences": {
        "subj": ["Businesses", "Markets", "Workers", "Retailers", "Economists", "Investors"],
        "noun": ["unemployment", "recession", "stocks", "layoffs", "inflation", "wages",
                 "stimulus", "tariffs", "revenue", "bankruptcy", "payrolls", "earnings"],
        "verb": ["brace for", "worry about", "react to", "cope with", "forecast", "weigh"],
    },
    "Gun control": {
        "subj": ["Lawmakers", "Advocates", "Police", "Sheriffs", "Activists", "Survivors"],
        "noun": ["firearms", "shooting", "rifles", "handguns", "ammunition", "gunman",
                 "background checks", "assault weapons", "permits", "gunfire", "pistols",
                 "magazines"],
        "verb": ["push for limits on", "debate", "respond to", "call for action on",
                 "investigate", "rally against"],
    },
    "Politics": {
        "subj": ["Senators", "Voters", "Candidates", "Governors", "Campaigns", "Delegates"],
        "noun": ["election", "ballots", "primary", "debate", "polls", "congress",
                 "legislation", "caucus", "turnout", "nominee", "filibuster", "impeachment"],
        "verb": ["clash over", "focus on", "gear up for", "split on", "question", "campaign on"],
    },
    "Climate": {
        "subj": ["Scientists", "Farmers", "Coastal towns", "Regulators", "Firefighters",
                 "Engineers"],
        "noun": ["wildfires", "drought", "emissions", "flooding", "glaciers", "hurricanes",
                 "carbon", "heatwave", "rainfall", "wetlands", "pollution", "solar"],
        "verb": ["sound alarm on", "adapt to", "measure", "battle", "study", "plan around"],
    },
}

TAILS = ["", "", "", " amid {n}", " as {n} grows", " after {n} report", " despite {n}",
         ", officials say", " this week", " in 2020", ": what to know", " - analysis"]


def headline(rng, theme):
    t = THEMES[theme]
    n1, n2 = rng.sample(t["noun"], 2)
    tail = rng.choice(TAILS).format(n=n2)
    text = f"{rng.choice(t['subj'])} {rng.choice(t['verb'])} {n1}{tail}"
    if rng.random() < 0.05:
        text = f'"{text}"'
    return text


def main():
    rng = random.Random(20200501)
    rows = []
    for theme in THEMES:
        rows += [(headline(rng, theme), theme) for _ in range(200)]
    rng.shuffle(rows)
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["Example", "Label"])
    w.writerows(rows)
    path = sys.argv[1] if len(sys.argv) > 1 else "headlines_1000.csv"
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(out.getvalue())


if __name__ == "__main__":
    main()
