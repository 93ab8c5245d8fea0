#!/usr/bin/env python3
"""Regenerates the fixture decks (PNG pages + deck.json) and course.json."""
import json
import pathlib
import textwrap

from PIL import Image, ImageDraw

HERE = pathlib.Path(__file__).resolve().parent

DECKS = {
    "multimedia-principle": (
        "The Multimedia Principle",
        [
            "The multimedia principle: people learn better from words and pictures than from words alone.",
            "Words can be printed text or spoken narration. Pictures can be static graphics such as illustrations, charts and photos, or dynamic graphics such as animation and video.",
            "Why pictures help: learners build a verbal model and a pictorial model and connect them. Words alone rarely lead to that integration.",
            "Graphics that support learning: representational graphics show what an object looks like; organizational graphics show relations among ideas; explanatory graphics show how a process works.",
            "Decorative graphics add interest but no content. They can distract learners and should be avoided in instruction.",
            "The multimedia effect is strongest for novices with low prior knowledge. Experts can build mental images from words alone.",
            "Applying the principle in e-learning design: pair each key concept with a relevant graphic and place the words next to the picture they describe.",
            "",
        ],
    ),
    "coherence-principle": (
        "The Coherence Principle",
        [
            "The coherence principle: people learn better when extraneous words, sounds and pictures are excluded.",
            "Background music and sound effects compete for limited working memory and reduce learning.",
            "Interesting but irrelevant stories, called seductive details, distract learners from the core explanation.",
            "Keep lessons concise: a short explanation with a focused graphic outperforms a long explanation with extra detail.",
        ],
    ),
}


def render_page(title, text, path, page_no):
    img = Image.new("RGB", (640, 360), "white")
    draw = ImageDraw.Draw(img)
    draw.rectangle([0, 0, 639, 40], fill=(32, 64, 128))
    draw.text((12, 12), f"{title}  -  {page_no}", fill="white")
    if text:
        for i, line in enumerate(textwrap.wrap(text, 80)):
            draw.text((24, 64 + 18 * i), line, fill="black")
    else:
        # Image-only page: a simple diagram with no text layer.
        draw.rectangle([120, 120, 260, 240], outline="black", width=3)
        draw.ellipse([380, 120, 520, 240], outline="black", width=3)
        draw.line([260, 180, 380, 180], fill="black", width=3)
    img.save(path, optimize=True)


def write_decks():
    for deck_id, (title, pages) in DECKS.items():
        d = HERE / "decks" / deck_id
        d.mkdir(parents=True, exist_ok=True)
        manifest = {"deck_id": deck_id, "title": title, "pages": []}
        for n, text in enumerate(pages, start=1):
            render_page(title, text, d / f"page{n:02d}.png", n)
            manifest["pages"].append({"page_no": n, "image": f"page{n:02d}.png", "text": text})
        (d / "deck.json").write_text(json.dumps(manifest, indent=2) + "\n")


MM = {"decks": [{"deck_id": "multimedia-principle"}]}
MM_CORE = {"decks": [{"deck_id": "multimedia-principle", "first_page": 1, "last_page": 4}]}
BOTH = {"decks": [{"deck_id": "multimedia-principle"}, {"deck_id": "coherence-principle"}]}


def questions():
    mcq = [
        ("mcq1", "Which combination does the multimedia principle recommend?",
         ["Words alone", "Pictures alone", "Words and pictures", "Words and background music"], 2, "lo1", MM,
         "Right: words and pictures together beat words alone, because learners connect a verbal and a pictorial model."),
        ("mcq2", "Which graphic shows how a process works?",
         ["Decorative", "Representational", "Explanatory", "Organizational"], 2, "lo1", MM,
         "Explanatory graphics show how something works, for example the steps of a process."),
        ("mcq3", "For which learners is the multimedia effect strongest?",
         ["Experts", "Novices with low prior knowledge", "All learners equally", "Learners who prefer audio"], 1, "lo2", MM,
         "Novices gain the most; experts can picture the content from words alone."),
        ("mcq4", "What should be done with decorative graphics in a lesson?",
         ["Add more of them", "Avoid them", "Animate them", "Put them first"], 1, "lo2", BOTH,
         "Decorative graphics carry no content and can distract, so leave them out."),
        ("mcq5", "Where should words be placed relative to the graphic they describe?",
         ["On a later screen", "Next to the graphic", "In a footnote", "In narration only"], 1, "lo2", MM,
         "Place words next to the part of the picture they describe so learners can connect them."),
    ]
    open_ended = [
        ("oe1", "What is the multimedia principle in e-learning design?", "lo1", MM,
         "Good start. The principle says people learn better from words and pictures than from words alone. Try to name why: learners link a verbal and a pictorial model."),
        ("oe2", "Explain why adding relevant pictures to words can improve learning.", "lo1", MM_CORE,
         "Think about the two mental models learners build, one from words and one from pictures, and how connecting them deepens understanding."),
        ("oe3", "Describe the difference between a decorative graphic and an explanatory graphic.", "lo1", MM,
         "A decorative graphic adds interest but no content; an explanatory graphic shows how a process works. Give an example of each."),
        ("oe4", "Why might the multimedia principle matter less for expert learners?", "lo2", MM,
         "Experts can build mental images from words alone, so extra pictures add less. Link your answer to prior knowledge."),
        ("oe5", "How would you apply the multimedia principle when designing an online lesson?", "lo2", BOTH,
         "Pair each key idea with a relevant graphic, keep the words beside the picture, and drop decoration that adds nothing."),
    ]
    out = []
    for qid, prompt, options, key, lo, rng, fb in mcq:
        out.append({"question_id": qid, "kind": "MCQ", "prompt_text": prompt, "options": options,
                    "answer_key": key, "learning_objective_id": lo, "retrieval_range": rng,
                    "human_feedback_text": fb})
    for qid, prompt, lo, rng, fb in open_ended:
        out.append({"question_id": qid, "kind": "OPEN_ENDED", "prompt_text": prompt,
                    "learning_objective_id": lo, "retrieval_range": rng, "human_feedback_text": fb})
    return out


def test_items():
    items = []
    topics = [
        ("Words plus pictures versus words alone", ["worse", "better", "the same", "it depends on fonts"], 1),
        ("Printed text counts as", ["words", "pictures", "neither", "animation"], 0),
        ("An animation is a", ["static graphic", "dynamic graphic", "word", "sound"], 1),
        ("A chart showing relations among ideas is", ["decorative", "organizational", "explanatory", "representational"], 1),
        ("A photo of the equipment is", ["representational", "decorative", "organizational", "explanatory"], 0),
        ("A clip-art border is", ["explanatory", "organizational", "decorative", "representational"], 2),
        ("Decorative graphics tend to", ["help", "distract", "speed reading", "replace text"], 1),
        ("The multimedia effect is strongest for", ["experts", "novices", "instructors", "designers"], 1),
        ("Background music during a lesson", ["helps", "hurts", "has no effect", "replaces narration"], 1),
        ("Seductive details are", ["core content", "irrelevant but interesting", "summaries", "quiz items"], 1),
        ("Words should be placed", ["far from the graphic", "next to the graphic", "after the lesson", "in an appendix"], 1),
        ("Learners integrate", ["verbal and pictorial models", "only verbal models", "only pictures", "nothing"], 0),
        ("Extraneous sounds", ["should be excluded", "should be added", "are required", "are neutral"], 0),
        ("A concise lesson compared to a padded one", ["learns worse", "learns better", "is identical", "is slower"], 1),
        ("A process diagram is an example of", ["explanatory graphic", "decorative graphic", "text", "narration"], 0),
    ]
    for i, (prompt, options, key) in enumerate(topics, start=1):
        items.append({"item_id": f"t{i:02d}", "prompt": prompt, "options": options, "key": key})
    return items


SURVEY = [
    "I am satisfied with my overall learning experience.",
    "I feel I gained sufficient knowledge and learning outcomes.",
    "Feedback was easy to understand.",
    "Feedback for learn-by-doing was helpful.",
    "Feedback provided actionable suggestions.",
    "Feedback encouraged reflection and critical thinking.",
    "It was important to me to know whether the feedback was generated by a human or an AI.",
    "Trust in feedback.",
    "Feedback addressed issues in my responses.",
    "Feedback was personalized.",
    "Feedback motivated me to engage.",
]


def write_course():
    items = test_items()
    course = {
        "course_id": "multimedia-principle-study",
        "questions": questions(),
        "pre_test": {
            "items": items,
            "attention_check": {"item_id": "attn-pre", "prompt": "To show you are reading, choose the third option.",
                                "options": ["one", "two", "three", "four"], "key": 2},
        },
        "post_test": {
            "items": items,
            "attention_check": {"item_id": "attn-post", "prompt": "Please select the first option to continue.",
                                "options": ["first", "second", "third", "fourth"], "key": 0},
        },
        "survey": [{"item_id": f"Q{i}", "text": t} for i, t in enumerate(SURVEY, start=1)]
        + [{"item_id": "Q12", "text": "Select Strongly Disagree for this item.", "attention_expected": 1}],
    }
    (HERE / "course.json").write_text(json.dumps(course, indent=2) + "\n")


if __name__ == "__main__":
    write_decks()
    write_course()
