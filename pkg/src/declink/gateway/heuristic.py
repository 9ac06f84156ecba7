"""Deterministic lexical stand-in for the model, used by fuzz/property tests.

Never used to author acceptance goldens; quality is irrelevant, determinism
and schema-conformance are the point. Responses are raw text in the same
shape a live model would produce.
"""

from __future__ import annotations

import json
import re

from . import templates as T

_WORD_RE = re.compile(r"[a-zA-Z]{4,}")
_STOPWORDS = frozenset(
    "this that with here there just like want make going little bit really "
    "then them they have will should could would also some more next now "
    "looks look good fine okay let's well see need about because order "
    "since what when where which think thing".split()
)


def _content_words(text: str) -> set[str]:
    return {w.lower() for w in _WORD_RE.findall(text)} - _STOPWORDS


def _sentence_link(variables: dict[str, str]) -> str:
    sentences = json.loads(variables["transcript"])
    groups: list[list[str]] = []
    for text in sentences:
        if groups and _content_words(groups[-1][-1]) & _content_words(text):
            groups[-1].append(text)
        else:
            groups.append([text])
    return json.dumps({str(i): " ".join(g) for i, g in enumerate(groups)}, ensure_ascii=False)


def _sa_link(variables: dict[str, str]) -> str:
    segments = json.loads(variables["segmented_transcripts"])
    actions = json.loads(variables["sets_of_design_action_and_screenshot"])
    links: dict[str, list[str]] = {}
    reversed_links: dict[str, list[str]] = {}
    for seg in segments:
        seg_words = _content_words(seg["sentences"])
        gid = str(seg["index"])
        for act in actions:
            name_words = _content_words(act.get("element", ""))
            if name_words and name_words & seg_words:
                ts = str(act["timestamp"])
                links.setdefault(ts, []).append(gid)
                reversed_links.setdefault(gid, []).append(ts)
    return json.dumps(
        {
            "links": [{ts: gids} for ts, gids in links.items()],
            "reversed_links": [{gid: tss} for gid, tss in reversed_links.items()],
        },
        ensure_ascii=False,
    )


_LEFT_CUES = ("looks", "done", "finished", "good", "better now", "that works")
_RIGHT_CUES = ("now", "next", "plan", "i'll", "i will", "let's", "going to")


def _sentence_assign(variables: dict[str, str]) -> str:
    sentence = variables["unassigned_grouped_sentence"].lower()
    left = variables["left_grouped_sentence"].strip()
    right = variables["right_grouped_sentence"].strip()
    if not left and not right:
        return "unrelated"
    if left and any(cue in sentence for cue in _LEFT_CUES):
        return "left"
    if right and any(cue in sentence for cue in _RIGHT_CUES):
        return "right"
    return "unrelated"


_EVAL_CUES = (
    ("convention", "S-PK"),
    ("principle", "S-PK"),
    ("guideline", "S-PK"),
    ("in my experience", "S-PK"),
    ("so that", "S-SR"),
    ("in order to", "S-SR"),
    ("instead of", "S-CA"),
    ("rather than", "S-CA"),
    ("compared", "S-CA"),
    ("because", "W-SR"),
    ("too big", "W-SR"),
    ("too small", "W-SR"),
    ("i like", "W-PK"),
    ("looks good", "W-PK"),
    ("looks fine", "W-PK"),
    ("try this and see", "W-CA"),
    ("maybe", "W-CA"),
)


def _rationale_eval(variables: dict[str, str]) -> str:
    text = variables["decision_step"].lower()
    categories = []
    for cue, code in _EVAL_CUES:
        if cue in text and code not in categories:
            categories.append(code)
    if not categories:
        categories = ["E"]
    return json.dumps(
        {"reason": "cue-word match on: " + ", ".join(categories), "categories": categories}
    )


def _question_gen(variables: dict[str, str]) -> str:
    step = variables["decision_step"].strip()
    head = step.split(".")[0][:120] or "this decision"
    return json.dumps(
        {"question": f"What was the reasoning behind the choice you described when you said \"{head}\"?"},
        ensure_ascii=False,
    )


def _rationale_infer(variables: dict[str, str]) -> str:
    step_words = _content_words(variables["decision_step"])
    summaries = json.loads(variables["previous_decision_step_summaries"])
    for summary in summaries:
        if len(_content_words(summary["decision_and_actions"]) & step_words) >= 2:
            return json.dumps(
                {
                    "inferred_rationale": summary["rationale"],
                    "reasoning": "concrete overlap with a previous decision on the same elements",
                },
                ensure_ascii=False,
            )
    return json.dumps({"inferred_rationale": "None", "reasoning": "None"})


def _summary(variables: dict[str, str]) -> str:
    step = " ".join(variables["decision_step"].split()) or "No explanation was given."
    answer = variables.get("answer")
    rationale = answer if answer else f"Stated in the step: {step}"
    return json.dumps(
        {
            "decision_and_actions": step[:200],
            "rationale": " ".join(rationale.split())[:200],
            "progression": "The designer continued the workflow after this step.",
        },
        ensure_ascii=False,
    )


def _baseline_segment(variables: dict[str, str]) -> str:
    sentences = json.loads(variables["transcript"])
    boundaries = [
        i
        for i in range(1, len(sentences))
        if not (_content_words(sentences[i - 1]) & _content_words(sentences[i]))
    ]
    return json.dumps({"boundaries": boundaries})


_RESPONDERS = {
    T.SENTENCE_LINK: _sentence_link,
    T.SA_LINK: _sa_link,
    T.SENTENCE_ASSIGN: _sentence_assign,
    T.RATIONALE_EVAL: _rationale_eval,
    T.QUESTION_GEN: _question_gen,
    T.RATIONALE_INFER: _rationale_infer,
    T.SUMMARY: _summary,
    T.SUMMARY_WITH_ANSWER: _summary,
    T.BASELINE_SEGMENT: _baseline_segment,
}


def respond(template_id: str, variables: dict[str, str]) -> str:
    return _RESPONDERS[template_id](variables)
