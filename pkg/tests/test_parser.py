import pytest

from ippd.errors import DataError
from ippd.instruction_parser import (
    LANDMARK,
    TURN_LEFT,
    TURN_RIGHT,
    default_parser,
    tokenize,
)


def _kinds(parser, text):
    out = []
    for c in parser.extract_key_components(text):
        if c.kind == LANDMARK:
            out.append(parser.categories.label_of(c.category_id))
        else:
            out.append(c.kind)
    return out


def test_tokenize_keeps_and_drops_punctuation():
    assert tokenize("walk, then stop.") == ["walk", ",", "then", "stop", "."]
    assert tokenize("walk, then stop.", keep_punct=False) == ["walk", "then", "stop"]


def test_pos_tag_basic(parser):
    tags = dict(parser.pos_tag("walk past the sofa"))
    assert tags["walk"] == "VB"
    assert tags["sofa"] == "NN"
    assert tags["the"] == "other"


def test_clause_initial_word_is_imperative_verb(parser):
    # "head" is noun/verb ambiguous; clause-initial it must act as a verb
    tags = parser.pos_tag("head to the right")
    assert tags[0] == ("head", "VB")


def test_wsd_picks_gloss_overlap(parser):
    wall_sense = parser.wsd_lesk("picture", ["picture", "hangs", "on", "the", "wall"])
    film_sense = parser.wsd_lesk("picture", ["watched", "a", "picture", "at", "the", "cinema"])
    assert wall_sense != film_sense


def test_wu_palmer_hand_values(parser):
    wp = parser.wu_palmer
    assert wp("sofa.n.01", "sofa.n.01") == pytest.approx(1.0)
    assert wp("sofa.n.01", "chair.n.01") == pytest.approx(5 / 6)
    assert wp("sofa.n.01", "bed.n.01") == pytest.approx(8 / 11)
    assert wp("wall.n.01", "door.n.01") == pytest.approx(4 / 5)
    assert wp("plant.n.01", "flower.n.01") == pytest.approx(8 / 9)
    assert wp("kitchen.n.01", "bathroom.n.01") == pytest.approx(4 / 5)
    assert wp("picture.n.01", "picture.n.02") == pytest.approx(2 / 9)


def test_wu_palmer_symmetry(parser):
    assert parser.wu_palmer("sofa.n.01", "plant.n.01") == parser.wu_palmer(
        "plant.n.01", "sofa.n.01"
    )


def test_wu_palmer_unknown_synset(parser):
    with pytest.raises(DataError):
        parser.wu_palmer("sofa.n.01", "nonexistent.n.01")


def test_nearest_label_exact_category(parser):
    sid = parser.object_synsets.synset_of("sofa")
    cid, score = parser.nearest_label(sid)
    assert parser.categories.label_of(cid) == "sofa"
    assert score == pytest.approx(1.0)


def test_turn_phrases(parser):
    assert _kinds(parser, "take a right turn") == [TURN_RIGHT]
    assert _kinds(parser, "head to the right") == [TURN_RIGHT]
    assert _kinds(parser, "turn left") == [TURN_LEFT]


def test_direction_adjective_does_not_fire(parser):
    # "right" here modifies "wall"; no turn component may appear
    out = _kinds(parser, "you can observe a picture on the right wall")
    assert out == ["picture"]


def test_mixed_sequence_preserves_order(parser):
    out = _kinds(parser, "take a right turn and walk past the sofa")
    assert out == [TURN_RIGHT, "sofa"]
    out = _kinds(parser, "walk past the sofa and turn left at the door")
    assert out == ["sofa", TURN_LEFT, "door"]


def test_unknown_nouns_are_skipped(parser):
    assert _kinds(parser, "walk to the zzyzx") == []


def test_direction_fires_once_per_token(parser):
    # two verbs sharing one window must not double-report the turn
    out = _kinds(parser, "go and turn right")
    assert out == [TURN_RIGHT]
