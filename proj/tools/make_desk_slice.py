#!/usr/bin/env python3
"""Regenerate the synthetic scene fixtures under tests/fixtures.

Each image is a small JSON scene (a flat grid of labelled patches) that the
mock backends read in place of pixels.
"""

import argparse
import json
import random
from pathlib import Path

SUBJECTS = {
    "dog": (["brown", "black", "white"], ["running", "sleeping", "sitting", "eating"]),
    "cat": (["black", "white", "orange"], ["sleeping", "sitting", "eating"]),
    "horse": (["brown", "white", "black"], ["running", "eating", "standing"]),
    "bird": (["blue", "red", "yellow"], ["flying", "sitting", "eating"]),
    "man": (["tall", "young", "old"], ["skating", "surfing", "reading", "cooking"]),
    "woman": (["tall", "young", "old"], ["reading", "cooking", "running", "skiing"]),
    "bus": (["red", "yellow", "blue"], ["parked", "turning"]),
    "car": (["red", "blue", "silver"], ["parked", "turning"]),
    "boat": (["white", "red", "blue"], ["sailing", "floating"]),
    "giraffe": (["tall", "young"], ["eating", "standing", "walking"]),
    "elephant": (["gray", "young"], ["walking", "drinking", "standing"]),
    "kite": (["red", "green", "yellow"], ["flying"]),
    "train": (["green", "red", "black"], ["arriving", "parked"]),
    "pizza": (["hot", "cheesy"], []),
    "umbrella": (["red", "black", "striped"], []),
}
COLORS = {"brown", "black", "white", "orange", "blue", "red", "yellow", "silver", "gray", "green"}
BACKGROUND = ["sky", "grass", "wall", "road", "water", "table", "tree", "building", "field", "beach"]
COUNT_WORDS = {2: "two", 3: "three", 4: "four", 5: "five"}
GRID = 16


def annotators(truth, alternatives, rng):
    agree = rng.randint(6, 10)
    answers = [truth] * agree
    while len(answers) < 10:
        answers.append(rng.choice(alternatives) if alternatives else truth)
    rng.shuffle(answers)
    return answers


def make_scene(rng):
    subject = rng.choice(sorted(SUBJECTS))
    attrs, actions = SUBJECTS[subject]
    second = rng.choice([s for s in sorted(SUBJECTS) if s != subject])
    attribute = rng.choice(attrs)
    action = rng.choice(actions) if actions else ""
    count = rng.choice([1, 1, 2, 3, 4])

    patches = []
    for _ in range(rng.randint(4, 6)):
        p = {"object": subject, "attribute": attribute}
        if action:
            p["action"] = action
        if count > 1:
            p["count"] = count
        patches.append(p)
    s_attrs, s_actions = SUBJECTS[second]
    s_attr = rng.choice(s_attrs)
    for _ in range(rng.randint(2, 3)):
        p = {"object": second, "attribute": s_attr}
        if s_actions:
            p["action"] = rng.choice(s_actions)
        patches.append(p)
    backdrop = rng.sample(BACKGROUND, 3)
    while len(patches) < GRID:
        patches.append({"object": rng.choice(backdrop)})
    rng.shuffle(patches)
    return {"patches": patches}, subject, attribute, action, count, second


def make_question(scene_info, rng):
    _, subject, attribute, action, count, second = scene_info
    kinds = ["object", "yesno"]
    if attribute in COLORS:
        kinds.append("color")
    if action:
        kinds.append("action")
    if count > 1:
        kinds.append("count")
    kind = rng.choice(kinds)
    attrs, actions = SUBJECTS[subject]
    if kind == "color":
        alts = sorted(c for c in COLORS if c != attribute)
        return f"What color is the {subject}?", annotators(attribute, alts, rng)
    if kind == "action":
        alts = sorted(a for a in actions if a != action) or ["standing"]
        return f"What is the {subject} doing?", annotators(action, alts, rng)
    if kind == "count":
        alts = [str(n) for n in (count - 1, count + 1)]
        return f"How many {subject}s are there?", annotators(str(count), alts, rng)
    if kind == "yesno":
        return f"Is there a {subject} in the picture?", annotators("yes", ["no"], rng)
    alts = sorted(s for s in SUBJECTS if s != subject)[:3]
    where = f"near the {second}" if rng.random() < 0.5 else "in the picture"
    return f"What is {where}?", annotators(subject, alts, rng)


def desk_slice(rng, n):
    samples = []
    for i in range(n):
        info = make_scene(rng)
        question, answers = make_question(info, rng)
        samples.append(
            {
                "image_id": f"desk{i:04d}",
                "question_id": f"desk{i:04d}_q0",
                "question": question,
                "answers": answers,
                "scene": info[0],
            }
        )
    return {"name": "desk-slice", "samples": samples}


def bartender_scene():
    patches = [{"object": "bartender", "action": "mixing drinks"} for _ in range(5)]
    patches += [{"object": "bottles", "attribute": "glass", "count": 3} for _ in range(3)]
    patches += [{"object": "bar counter", "attribute": "wooden"} for _ in range(4)]
    patches += [{"object": "wall"} for _ in range(4)]
    return {"patches": patches}


def official_layout(rng, root, n=6):
    images = root / "images"
    images.mkdir(parents=True, exist_ok=True)
    questions, annotations, aok = [], [], []
    for i in range(n):
        image_id = 100 + i
        info = make_scene(rng)
        question, answers = make_question(info, rng)
        scene_text = json.dumps(info[0], sort_keys=True)
        (images / f"COCO_val2014_{image_id:012d}.jpg").write_text(scene_text + "\n")
        (images / f"{image_id:012d}.jpg").write_text(scene_text + "\n")
        qid = image_id * 10
        questions.append({"image_id": image_id, "question": question, "question_id": qid})
        annotations.append(
            {
                "image_id": image_id,
                "question_id": qid,
                "answers": [{"answer": a, "answer_id": k + 1} for k, a in enumerate(answers)],
            }
        )
        aok.append(
            {
                "question_id": f"aok{qid}",
                "image_id": image_id,
                "question": question,
                "direct_answers": answers,
            }
        )
    dump(root / "questions.json", {"questions": questions})
    dump(root / "annotations.json", {"annotations": annotations})
    dump(root / "aokvqa_val.json", aok)


def dump(path, obj):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=1, sort_keys=True) + "\n")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "tests" / "fixtures"))
    ap.add_argument("--seed", type=int, default=20230131)
    ap.add_argument("--samples", type=int, default=100)
    args = ap.parse_args()
    out = Path(args.out)
    rng = random.Random(args.seed)
    dump(out / "desk_slice.json", desk_slice(rng, args.samples))
    dump(out / "images" / "bartender_scene.json", bartender_scene())
    official_layout(rng, out / "official")


if __name__ == "__main__":
    main()
