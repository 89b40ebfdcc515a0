"""Writes the ten-task demo fixture: seed demos, datasets, manifest, LLM script.

Run from this directory: python3 generate.py
"""
import json
import random
import re

rng = random.Random(20240501)
NAMES = ["Ava", "Ben", "Cleo", "Dev", "Eli", "Fay", "Gus", "Hana", "Ivo", "Jun", "Kai", "Lea"]
WORDS = ["river", "lamp", "orbit", "maple", "quartz", "violet", "ember", "tundra", "harbor", "cobalt", "fjord", "saddle"]
ANIMALS = ["otter", "camel", "heron", "lynx", "moose", "gecko", "walrus", "panda"]
DAYS = ["Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday", "Sunday"]


def addition():
    a, b = rng.randint(3, 60), rng.randint(3, 60)
    n = rng.choice(NAMES)
    return f"{n} has {a} marbles and finds {b} more marbles at the park. How many marbles does {n} have now?", str(a + b)


def multistep():
    p, k, g = rng.randint(2, 9), rng.randint(3, 12), rng.randint(1, 5)
    n = rng.choice(NAMES)
    return f"{n} buys {p} boxes with {k} crayons in each box, then gives {g} crayons to a friend. How many crayons remain with {n}?", str(p * k - g)


def coin():
    people = rng.sample(NAMES, 3)
    flips = [rng.random() < 0.5 for _ in people]
    parts = [f"{p} {'flips' if f else 'does not flip'} the coin." for p, f in zip(people, flips)]
    return "A coin is heads up. " + " ".join(parts) + " Is the coin still heads up?", "no" if sum(flips) % 2 else "yes"


def last_letters():
    ws = rng.sample(WORDS, 3)
    return f'Take the last letters of each word in "{" ".join(ws)}" and concatenate them.', "".join(w[-1] for w in ws)


def weekday():
    d, k = rng.randrange(7), rng.randint(2, 30)
    return f"If today is {DAYS[d]}, which day of the week will it be in {k} days? Answer Choices: (A) {DAYS[(d + k) % 7]} (B) {DAYS[(d + k + 1) % 7]} (C) {DAYS[(d + k + 3) % 7]}", "A"


def shuffle_objects():
    a, b = rng.sample(ANIMALS, 2)
    return f"Alice holds a toy {a} and Bob holds a toy {b}. They swap toys twice. Does Alice end up holding the {a}?", "yes"


def percent():
    base, pct = 20 * rng.randint(2, 30), rng.choice([10, 20, 25, 50])
    return f"A jacket costs {base} dollars and is discounted by {pct} percent during the sale. What is the sale price in dollars?", str(base - base * pct // 100)


def parity():
    xs = [rng.randint(1, 40) for _ in range(4)]
    return f"Is the sum of the numbers {', '.join(map(str, xs))} an even number?", "yes" if sum(xs) % 2 == 0 else "no"


def count_letters():
    w = rng.choice(WORDS)
    c = rng.choice(sorted(set(w)))
    return f"Count how many times the letter '{c}' appears in the word '{w}'.", str(w.count(c))


def sequence():
    s, d = rng.randint(1, 20), rng.randint(2, 9)
    return f"What number comes next in the arithmetic progression {s}, {s + d}, {s + 2 * d}, {s + 3 * d}?", str(s + 4 * d)


TASKS = [
    ("addition", addition, "numeric", True),
    ("multistep", multistep, "numeric", True),
    ("coin_flip", coin, "yes_no", True),
    ("last_letters", last_letters, "free_text", True),
    ("weekday", weekday, "multiple_choice:A,B,C", True),
    ("swap_objects", shuffle_objects, "yes_no", True),
    ("percent", percent, "numeric", True),
    ("parity", parity, "yes_no", False),
    ("count_letters", count_letters, "numeric", False),
    ("sequence", sequence, "numeric", False),
]


def wrong(a):
    if a in ("yes", "no"):
        return "no" if a == "yes" else "yes"
    if a.isdigit():
        return str(int(a) + 1)
    if a == "A":
        return "B"
    return a[::-1] + "x"


def unique(gen, n, taken):
    out = []
    for _ in range(10000):
        if len(out) == n:
            return out
        q, a = gen()
        if q not in taken:
            taken.add(q)
            out.append((q, a))
    raise SystemExit(f"{gen.__name__}: not enough distinct questions")


manifest = []
rules = []
taken = set()
for name, gen, fmt, seeded in TASKS:
    if seeded:
        with open(f"seeds/{name}.jsonl", "w") as f:
            for q, a in unique(gen, 4, taken):
                f.write(json.dumps({"question": q, "rationale": "Work it out step by step.", "answer": a}) + "\n")
    with open(f"data/{name}.jsonl", "w") as f:
        for i, (q, a) in enumerate(unique(gen, 40, taken)):
            line = {"question": q, "answer": a}
            if " Answer Choices: " in q:
                stem, rest = q.split(" Answer Choices: ")
                line = {"question": stem, "answer": a, "choices": re.findall(r"\(\w\) (\w+)", rest)}
            f.write(json.dumps(line) + "\n")
            # Every seventh answer is scripted wrong so accuracy is not trivially 100%.
            said = a if i % 7 else wrong(a)
            rules.append({"contains": q, "completion": f"Reading the question carefully. The answer is {said}."})
    manifest.append({"name": name, "path": f"data/{name}.jsonl", "answer_format": fmt, "gold_type": name})

with open("llm_script.json", "w") as f:
    json.dump({"rules": rules, "default": "I am not sure.", "scope": "last_question"}, f, indent=1)
    f.write("\n")

with open("config.json", "w") as f:
    json.dump({"th_ca": 60, "th_cls": 20, "k": 4}, f, indent=2)
    f.write("\n")

with open("manifest.json", "w") as f:
    json.dump(manifest, f, indent=2)
    f.write("\n")
