"""Regenerate the bundled GLUE-style fixtures under src/promptprobe/data/datasets.

The sentences are written for this project in the style of each task; they
are not copies of the public benchmark files. Output is deterministic.

    python tools/make_fixtures.py
"""
import itertools
import json
import random
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1] / "src" / "promptprobe" / "data" / "datasets"

SST2_POS = [
    "a warm, funny and thoroughly engaging film",
    "the performances are uniformly excellent",
    "one of the most charming movies of the year",
    "a clever script that never talks down to its audience",
    "beautifully shot and deeply moving",
    "the director keeps the tension high from start to finish",
    "an absolute delight for the whole family",
    "the cast has wonderful chemistry together",
    "smart, stylish and surprisingly touching",
    "i left the theater with a huge smile",
    "a triumph of understated storytelling",
    "the soundtrack alone is worth the ticket",
    "a gripping thriller with a satisfying finale",
    "it is the rare sequel that improves on the original",
    "fresh, inventive and full of heart",
    "the lead actress gives a career-best turn",
    "a richly detailed portrait of a small town",
    "every scene feels carefully crafted",
    "the jokes land and the pacing is brisk",
    "an inspiring story told with great restraint",
    "visually stunning and emotionally honest",
    "a confident debut from a talented filmmaker",
    "the dialogue crackles with wit",
    "a moving tribute to friendship",
    "it rewards patient viewers handsomely",
    "the animation is gorgeous and the story is sweet",
    "a sharp satire that hits all its targets",
    "thoughtful, tender and wonderfully acted",
    "the best documentary i have seen in years",
    "a joyous celebration of music and memory",
    "an elegant and absorbing period drama",
    "the ending is pitch perfect",
]
SST2_NEG = [
    "a tedious mess with no redeeming qualities",
    "the plot makes no sense at all",
    "flat performances and a lifeless script",
    "i checked my watch every ten minutes",
    "a lazy, cynical cash grab",
    "the jokes fall flat one after another",
    "an overlong and painfully dull drama",
    "the characters are thin and forgettable",
    "clumsy editing ruins every action scene",
    "a baffling waste of a talented cast",
    "the dialogue is wooden and awkward",
    "it drags on long after the story runs out",
    "a predictable thriller without any thrills",
    "the special effects look cheap and unfinished",
    "an incoherent sequel nobody asked for",
    "the lead is badly miscast",
    "a sluggish and joyless comedy",
    "the soundtrack is grating and intrusive",
    "it never rises above its tired premise",
    "a muddled story that goes nowhere",
    "the pacing is glacial and the payoff is weak",
    "an ugly, mean-spirited film",
    "the twist is obvious from the first scene",
    "a forgettable and shallow romance",
    "the script is riddled with cliches",
    "it is as boring as it is pretentious",
    "the direction is listless and uninspired",
    "a frustrating experience from beginning to end",
    "the humor is crude and unfunny",
    "a hollow remake of a much better film",
    "the finale is a confusing letdown",
    "poorly written and poorly acted",
]

COLA_OK = [
    "The cat sat on the mat.",
    "She gave the book to her brother.",
    "We watched the game until midnight.",
    "The children played in the garden.",
    "He has lived here for ten years.",
    "Which book did you borrow from the library?",
    "The letter was written by my aunt.",
    "They are going to paint the fence tomorrow.",
    "I wonder whether it will rain.",
    "The students who studied hard passed the exam.",
    "Mary seems to be happy with the result.",
    "John is taller than his father.",
    "The river flows into the sea.",
    "Nobody expected the meeting to end so early.",
    "She could not find her keys anywhere.",
    "The dog chased the ball across the yard.",
    "It is easy to please the manager.",
    "We asked him to close the window.",
    "The soup tastes wonderful.",
    "Every student has submitted an essay.",
    "The old bridge collapsed during the storm.",
    "He might have forgotten the appointment.",
    "The teacher explained the problem twice.",
    "I bought a new pair of shoes.",
    "The baby fell asleep in the car.",
    "They elected her president of the club.",
    "The package arrived this morning.",
    "That he was late surprised everyone.",
    "The musicians tuned their instruments.",
    "Sarah believes that the plan will work.",
]
COLA_BAD = [
    "The cat sat the mat on.",
    "She gave to her brother.",
    "We watched the game midnight until.",
    "The children plays in the garden.",
    "He have lived here for ten years.",
    "Which book did you borrow it from the library?",
    "The letter was wrote by my aunt.",
    "They going to paint the fence tomorrow.",
    "I wonder whether will it rain.",
    "The students who studied hard passed exam the.",
    "Mary seems happy to be the result.",
    "John is more taller than his father.",
    "The river flows the sea into.",
    "Nobody expected the meeting ending so early to.",
    "She could not found her keys anywhere.",
    "The dog chased across the yard the ball the.",
    "It is easy to please the manager him.",
    "We asked to him close the window.",
    "The soup tastes wonderfully the.",
    "Every students has submitted an essay.",
    "The old bridge collapse during the storm yesterday ago.",
    "He might has forgotten the appointment.",
    "The teacher explained twice the the problem.",
    "I bought a new pair shoes of.",
    "The baby fell asleep the car in.",
    "They elected president her the club of.",
    "The package arrive this morning.",
    "That he was late surprised.",
    "The musicians tuned instruments their the.",
    "Sarah believes that the plan will works.",
]
COLA_FEWSHOT = [
    ("Our friends won't buy this analysis, let alone the next one we propose.", "acceptable"),
    ("One more pseudo generalization and I'm giving up.", "acceptable"),
    ("They drank the pub.", "unacceptable"),
    ("The sun rose over the quiet hills.", "acceptable"),
    ("Him went to the store yesterday.", "unacceptable"),
    ("My sister enjoys reading mystery novels.", "acceptable"),
    ("The car was drove by the mechanic.", "unacceptable"),
]

NAMES = ["Alice", "Ben", "Carla", "David", "Elena", "Farid", "Grace", "Hiro", "Irene", "Jonas",
         "Kemal", "Lena", "Marco", "Nadia", "Oscar", "Priya", "Quentin", "Rosa", "Samir", "Tara"]
POOL_NAMES = ["Victor", "Wanda", "Xavier", "Yara", "Zoltan", "Ulla"]
COMPANIES = ["Acme Corp", "Borealis Ltd", "Cobalt Systems", "Delta Foods", "Evergreen Bank",
             "Fulcrum Energy", "Granite Media", "Harbor Logistics", "Ionic Labs", "Juniper Motors"]
POOL_COMPANIES = ["Kestrel Air", "Lumen Retail", "Meridian Steel"]
CITIES = ["Lisbon", "Oslo", "Nairobi", "Lima", "Hanoi", "Quebec", "Perth", "Tbilisi", "Porto", "Accra"]
POOL_CITIES = ["Reykjavik", "Cusco", "Malmo"]


def rec(i, prefix, fields, label):
    return {"id": f"{prefix}-{i:03d}", "fields": fields, "label": label}


def write(name, meta, data, fewshot):
    d = ROOT / name
    d.mkdir(parents=True, exist_ok=True)
    (d / "meta.json").write_text(json.dumps(meta, indent=2) + "\n")
    for fname, rows in (("data.jsonl", data), ("fewshot.jsonl", fewshot)):
        with open(d / fname, "w") as fh:
            for r in rows:
                fh.write(json.dumps(r, sort_keys=True) + "\n")


def sst2():
    rng = random.Random(2)
    rows = [(s, "positive") for s in SST2_POS[:28]] + [(s, "negative") for s in SST2_NEG[:28]]
    rng.shuffle(rows)
    data = [rec(i, "sst2", {"sentence": s}, l) for i, (s, l) in enumerate(rows)]
    pool = [(s, "positive") for s in SST2_POS[28:]] + [(s, "negative") for s in SST2_NEG[28:]]
    rng.shuffle(pool)
    few = [rec(i, "sst2-fs", {"sentence": s}, l) for i, (s, l) in enumerate(pool)]
    meta = {"name": "sst2", "task_kind": "classification", "label_space": ["positive", "negative"],
            "field_names": ["sentence"]}
    write("sst2", meta, data, few)


def cola():
    rng = random.Random(3)
    rows = [(s, "acceptable") for s in COLA_OK] + [(s, "unacceptable") for s in COLA_BAD]
    rng.shuffle(rows)
    data = [rec(i, "cola", {"sentence": s}, l) for i, (s, l) in enumerate(rows)]
    few = [rec(i, "cola-fs", {"sentence": s}, l) for i, (s, l) in enumerate(COLA_FEWSHOT)]
    meta = {"name": "cola", "task_kind": "classification", "label_space": ["acceptable", "unacceptable"],
            "field_names": ["sentence"]}
    write("cola", meta, data, few)


def mrpc_rows(companies, cities, rng, n):
    rows = []
    combos = list(itertools.product(companies, cities))
    rng.shuffle(combos)
    for company, city in combos[:n]:
        amount = rng.randint(12, 95)
        other = amount + rng.randint(3, 40)
        quarter = rng.choice(["first", "second", "third", "fourth"])
        s1 = f"{company} said on Monday that its {quarter}-quarter profit rose to ${amount} million, helped by strong sales in {city}."
        kind = rng.randrange(3)
        if kind == 0:
            s2 = f"Helped by strong sales in {city}, {company} reported on Monday that {quarter}-quarter profit climbed to ${amount} million."
            label = "equivalent"
        elif kind == 1:
            s2 = f"{company} announced Monday a {quarter}-quarter profit of ${amount} million, boosted by robust demand in {city}."
            label = "equivalent"
        else:
            s2 = rng.choice([
                f"{company} said on Monday that its {quarter}-quarter profit rose to ${other} million after cutting jobs in {city}.",
                f"{company} warned on Monday that it may close its office in {city} next year.",
                f"Shares of {company} fell on Monday after analysts questioned its expansion plans in {city}.",
            ])
            label = "not_equivalent"
        rows.append(({"sentence1": s1, "sentence2": s2}, label))
    return rows


def mrpc():
    rng = random.Random(5)
    data = [rec(i, "mrpc", f, l) for i, (f, l) in enumerate(mrpc_rows(COMPANIES, CITIES, rng, 60))]
    few = [rec(i, "mrpc-fs", f, l) for i, (f, l) in enumerate(mrpc_rows(POOL_COMPANIES, POOL_CITIES, rng, 8))]
    meta = {"name": "mrpc", "task_kind": "paraphrase", "label_space": ["equivalent", "not_equivalent"],
            "field_names": ["sentence1", "sentence2"]}
    write("mrpc", meta, data, few)


QQP_TOPICS = [
    ("learn {x} quickly", "the fastest way to learn {x}", "get a job that uses {x}"),
    ("improve my {x} skills", "get better at {x}", "teach {x} to children"),
    ("start a career in {x}", "begin working in {x}", "explain {x} to my parents"),
    ("find free resources for {x}", "find {x} learning material without paying", "make money from {x}"),
    ("stay motivated while studying {x}", "keep my motivation when learning {x}", "choose a laptop for {x}"),
]
QQP_SUBJECTS = ["Python", "guitar", "photography", "French", "chess", "statistics", "painting",
                "accounting", "swimming", "welding", "Japanese", "cooking"]
QQP_POOL_SUBJECTS = ["origami", "sailing", "calligraphy"]


def qqp_rows(subjects, rng):
    rows = []
    for subj in subjects:
        for a, same, diff in QQP_TOPICS:
            q1 = f"How can I {a.format(x=subj)}?"
            if rng.random() < 0.5:
                q2 = f"What is {same.format(x=subj)}?" if same.startswith("the") else f"How do I {same.format(x=subj)}?"
                label = "duplicate"
            else:
                q2 = f"How can I {diff.format(x=subj)}?"
                label = "not_duplicate"
            rows.append(({"question1": q1, "question2": q2}, label))
    rng.shuffle(rows)
    return rows


def qqp():
    rng = random.Random(7)
    data = [rec(i, "qqp", f, l) for i, (f, l) in enumerate(qqp_rows(QQP_SUBJECTS, rng))]
    few = [rec(i, "qqp-fs", f, l) for i, (f, l) in enumerate(qqp_rows(QQP_POOL_SUBJECTS, rng)[:8])]
    meta = {"name": "qqp", "task_kind": "paraphrase", "label_space": ["duplicate", "not_duplicate"],
            "field_names": ["question1", "question2"]}
    write("qqp", meta, data, few)


RTE_FRAMES = [
    ("{n} moved from {c} to Berlin in 2015 to work as an engineer.", "{n} lives or has lived in Berlin.", "{n} has never left {c}."),
    ("After a long negotiation, {n} signed a contract with {co} in {c}.", "{n} signed a contract.", "{n} refused to sign any contract with {co}."),
    ("{co}, which is headquartered in {c}, employs about 4,000 people.", "{co} has its headquarters in {c}.", "{co} employs more than 40,000 people."),
    ("{n} won the regional chess championship held in {c} last spring.", "A chess championship took place in {c}.", "{n} lost every game at the championship in {c}."),
    ("The museum in {c} was renovated by {co} and reopened in May.", "The museum in {c} reopened.", "The museum in {c} has been closed permanently."),
    ("{n}, a nurse from {c}, volunteered at the clinic for three years.", "{n} worked as a volunteer.", "{n} is a lawyer who never volunteered."),
]


def rte_rows(names, companies, cities, rng, n):
    rows = []
    combos = list(itertools.product(range(len(RTE_FRAMES)), names, cities))
    rng.shuffle(combos)
    for k, name, city in combos[:n]:
        prem, ent, non = RTE_FRAMES[k]
        co = rng.choice(companies)
        fill = dict(n=name, c=city, co=co)
        label = rng.choice(["entailment", "not_entailment"])
        hyp = (ent if label == "entailment" else non).format(**fill)
        rows.append(({"sentence1": prem.format(**fill), "sentence2": hyp}, label))
    return rows


def rte():
    rng = random.Random(11)
    data = [rec(i, "rte", f, l) for i, (f, l) in enumerate(rte_rows(NAMES, COMPANIES, CITIES, rng, 60))]
    few = [rec(i, "rte-fs", f, l) for i, (f, l) in enumerate(rte_rows(POOL_NAMES, POOL_COMPANIES, POOL_CITIES, rng, 8))]
    meta = {"name": "rte", "task_kind": "nli", "label_space": ["entailment", "not_entailment"],
            "field_names": ["sentence1", "sentence2"]}
    write("rte", meta, data, few)


WNLI_FRAMES = [
    ("The trophy would not fit in the {o} because it was too big.", "The trophy was too big.", "The {o} was too big."),
    ("{a} thanked {b} because {b2} had helped with the move.", "{b} had helped with the move.", "{a} had helped with the move."),
    ("{a} could not lift {b}'s suitcase because it was too heavy.", "The suitcase was too heavy.", "{a} was too heavy."),
    ("{a} called {b} because {a2} wanted to apologize.", "{a} wanted to apologize.", "{b} wanted to apologize."),
    ("The {o} fell off the shelf because it was not stable.", "The {o} was not stable.", "The floor was not stable."),
]
OBJECTS = ["suitcase", "box", "drawer", "bag", "crate", "basket"]
POOL_OBJECTS = ["trunk", "locker"]


def wnli_rows(names, objects, rng, n):
    rows = []
    seen = set()
    while len(rows) < n:
        k = rng.randrange(len(WNLI_FRAMES))
        a, b = rng.sample(names, 2)
        o = rng.choice(objects)
        s1t, good, bad = WNLI_FRAMES[k]
        fill = dict(a=a, b=b, o=o, a2="she" if a in {"Alice", "Carla", "Elena", "Grace", "Irene", "Lena", "Nadia", "Priya", "Rosa", "Tara", "Wanda", "Yara", "Ulla"} else "he",
                    b2="she" if b in {"Alice", "Carla", "Elena", "Grace", "Irene", "Lena", "Nadia", "Priya", "Rosa", "Tara", "Wanda", "Yara", "Ulla"} else "he")
        label = rng.choice(["entailment", "not_entailment"])
        s1 = s1t.format(**fill)
        s2 = (good if label == "entailment" else bad).format(**fill)
        if (s1, s2) in seen:
            continue
        seen.add((s1, s2))
        rows.append(({"sentence1": s1, "sentence2": s2}, label))
    return rows


def wnli():
    rng = random.Random(13)
    data = [rec(i, "wnli", f, l) for i, (f, l) in enumerate(wnli_rows(NAMES, OBJECTS, rng, 60))]
    few = [rec(i, "wnli-fs", f, l) for i, (f, l) in enumerate(wnli_rows(POOL_NAMES, POOL_OBJECTS, rng, 6))]
    meta = {"name": "wnli", "task_kind": "nli", "label_space": ["entailment", "not_entailment"],
            "field_names": ["sentence1", "sentence2"]}
    write("wnli", meta, data, few)


QNLI_FRAMES = [
    ("Where is {co} headquartered?", "{co} is headquartered in {c}, where it opened its first office.", "{co} was founded by two former engineers."),
    ("Who founded the {c} Orchestra?", "The {c} Orchestra was founded by {n} in 1921.", "The {c} Orchestra performs about sixty concerts a year."),
    ("When did {n} arrive in {c}?", "{n} arrived in {c} in the autumn of 1998.", "{n} later wrote a memoir about the journey."),
    ("What does {co} manufacture?", "{co} manufactures electric bicycles and spare parts.", "{co} has sponsored the {c} marathon since 2010."),
    ("How many people live in the old quarter of {c}?", "Roughly 12,000 people live in the old quarter of {c}.", "The old quarter of {c} is famous for its tiled facades."),
]


def qnli_rows(names, companies, cities, rng, n):
    rows = []
    combos = list(itertools.product(range(len(QNLI_FRAMES)), cities, names))
    rng.shuffle(combos)
    for k, city, name in combos[:n]:
        q, ans, non = QNLI_FRAMES[k]
        fill = dict(n=name, c=city, co=rng.choice(companies))
        label = rng.choice(["entailment", "not_entailment"])
        s = (ans if label == "entailment" else non).format(**fill)
        rows.append(({"question": q.format(**fill), "sentence": s}, label))
    return rows


def qnli():
    rng = random.Random(17)
    data = [rec(i, "qnli", f, l) for i, (f, l) in enumerate(qnli_rows(NAMES, COMPANIES, CITIES, rng, 60))]
    few = [rec(i, "qnli-fs", f, l) for i, (f, l) in enumerate(qnli_rows(POOL_NAMES, POOL_COMPANIES, POOL_CITIES, rng, 8))]
    meta = {"name": "qnli", "task_kind": "nli", "label_space": ["entailment", "not_entailment"],
            "field_names": ["question", "sentence"]}
    write("qnli", meta, data, few)


MNLI_FRAMES = [
    ("{n} bought a red bicycle at the market in {c}.", "{n} bought a bicycle.", "{n} bought the bicycle as a gift for a friend.", "{n} did not buy anything at the market."),
    ("The train from {c} arrived two hours late because of snow.", "The train from {c} was delayed.", "The passengers on the train from {c} received a refund.", "The train from {c} arrived early."),
    ("{n} has taught mathematics in {c} for over twenty years.", "{n} is a teacher.", "{n} plans to retire next year.", "{n} has never taught in {c}."),
    ("{co} opened a new factory near {c} last month.", "{co} has a factory near {c}.", "The new factory near {c} makes furniture.", "{co} closed all of its factories near {c}."),
    ("Heavy rain flooded several streets in {c} on Tuesday.", "Some streets in {c} were flooded.", "Schools in {c} were closed on Tuesday.", "It was dry and sunny in {c} on Tuesday."),
]


def mnli_rows(names, companies, cities, rng, n):
    rows = []
    combos = list(itertools.product(range(len(MNLI_FRAMES)), cities, names))
    rng.shuffle(combos)
    for k, city, name in combos[:n]:
        prem, ent, neu, con = MNLI_FRAMES[k]
        fill = dict(n=name, c=city, co=rng.choice(companies))
        label = rng.choice(["entailment", "neutral", "contradiction"])
        hyp = {"entailment": ent, "neutral": neu, "contradiction": con}[label].format(**fill)
        rows.append(({"premise": prem.format(**fill), "hypothesis": hyp}, label))
    return rows


def mnli():
    rng = random.Random(19)
    data = [rec(i, "mnli", f, l) for i, (f, l) in enumerate(mnli_rows(NAMES, COMPANIES, CITIES, rng, 60))]
    few = [rec(i, "mnli-fs", f, l) for i, (f, l) in enumerate(mnli_rows(POOL_NAMES, POOL_COMPANIES, POOL_CITIES, rng, 9))]
    meta = {"name": "mnli", "task_kind": "nli", "label_space": ["entailment", "neutral", "contradiction"],
            "field_names": ["premise", "hypothesis"]}
    write("mnli", meta, data, few)


def bool_logic_dyn():
    from promptprobe.datasets import DatasetMeta, write_dataset_dir
    from promptprobe.dyval import DyValSpec, emit_batch, samples_to_records

    spec = DyValSpec(task="boolean_logic", depth=3, width=3, extra_links=1, value_range=(0, 1), seed=100)
    data = samples_to_records(emit_batch(spec, 60), prefix="bool")
    pool_spec = DyValSpec(task="boolean_logic", depth=2, width=2, extra_links=0, value_range=(0, 1), seed=9000)
    few = samples_to_records(emit_batch(pool_spec, 6), prefix="bool-fs")
    meta = DatasetMeta("bool_logic_dyn", "reasoning_freeform", (), ("description",))
    write_dataset_dir(ROOT / "bool_logic_dyn", meta, data, few)


def manifest():
    counts = {}
    for d in sorted(ROOT.iterdir()):
        if (d / "data.jsonl").exists():
            counts[d.name] = {
                "data": sum(1 for l in open(d / "data.jsonl") if l.strip()),
                "fewshot": sum(1 for l in open(d / "fewshot.jsonl") if l.strip()) if (d / "fewshot.jsonl").exists() else 0,
            }
    (ROOT / "manifest.json").write_text(json.dumps(counts, indent=2, sort_keys=True) + "\n")


if __name__ == "__main__":
    import sys

    glue_only = "--glue-only" in sys.argv
    for fn in (sst2, cola, mrpc, qqp, rte, wnli, qnli, mnli):
        fn()
    if not glue_only:
        bool_logic_dyn()
    manifest()
