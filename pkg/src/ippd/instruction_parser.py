"""Key-component extraction from navigation instructions.

The pipeline is: rule-based POS tagging over a bundled lexicon, Lesk
word-sense disambiguation against bundled glosses, Wu-Palmer similarity
over a bundled taxonomy tree, and a left-to-right scan that emits an
ordered sequence of landmark and turn components.
"""

from __future__ import annotations

import importlib.resources
import re
from dataclasses import dataclass

from .errors import DataError
from .semantic_map import CategoryTable

NOUN_TAGS = ("NN", "NNS")
VERB_TAGS = ("VB", "VBZ", "VBP")
VALID_TAGS = set(NOUN_TAGS) | set(VERB_TAGS) | {"other"}

GAMMA = 0.85
TURN_WINDOW = 3

_TOKEN_RE = re.compile(r"[a-z0-9']+|[.,;!?]")
_CLAUSE_BREAKERS = {".", "!", "?", ","}
_CLAUSE_HEADS = {"and", "then"}


def tokenize(text, keep_punct=True):
    """Lowercased word and punctuation tokens in order."""
    tokens = _TOKEN_RE.findall(text.lower())
    if not keep_punct:
        tokens = [t for t in tokens if t not in {".", ",", ";", "!", "?"}]
    return tokens


def _asset_text(name):
    return importlib.resources.files("ippd.assets").joinpath(name).read_text("utf-8")


class Lexicon:
    """Word -> (ordered tag list, ordered synset list); most frequent first."""

    def __init__(self, entries):
        self.entries = {}
        for word, (tags, synsets) in entries.items():
            word = word.lower()
            if not tags or any(t not in VALID_TAGS for t in tags):
                raise DataError(f"bad tags for {word!r}: {tags}")
            self.entries[word] = (tuple(tags), tuple(synsets))

    def __contains__(self, word):
        return word.lower() in self.entries

    def tags(self, word):
        entry = self.entries.get(word.lower())
        return entry[0] if entry else ()

    def synsets(self, word):
        entry = self.entries.get(word.lower())
        return entry[1] if entry else ()

    @classmethod
    def parse(cls, text):
        entries = {}
        for line in text.splitlines():
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise DataError(f"bad lexicon line: {line!r}")
            word, tags, synsets = parts
            entries[word] = (
                tags.split(",") if tags else [],
                synsets.split(",") if synsets else [],
            )
        return cls(entries)

    @classmethod
    def bundled(cls):
        return cls.parse(_asset_text("lexicon.tsv"))


class Taxonomy:
    """Single rooted tree of synsets with glosses; root depth is 1."""

    def __init__(self, nodes):
        self.gloss = {}
        self.parent = {}
        for synset, (gloss_words, parent) in nodes.items():
            self.gloss[synset] = tuple(gloss_words)
            self.parent[synset] = parent
        roots = [s for s, p in self.parent.items() if p is None]
        if len(roots) != 1:
            raise DataError(f"taxonomy must have exactly one root, found {roots}")
        for s, p in self.parent.items():
            if p is not None and p not in self.parent:
                raise DataError(f"synset {s} has unknown parent {p}")
        self.depth = {}
        for s in self.parent:
            self._depth_of(s, trail=set())

    def _depth_of(self, s, trail):
        if s in self.depth:
            return self.depth[s]
        if s in trail:
            raise DataError(f"taxonomy cycle through {s}")
        trail.add(s)
        p = self.parent[s]
        d = 1 if p is None else 1 + self._depth_of(p, trail)
        self.depth[s] = d
        return d

    def __contains__(self, synset):
        return synset in self.parent

    def ancestors(self, synset):
        """synset and all ancestors, nearest first, ending at the root."""
        out = [synset]
        while self.parent[out[-1]] is not None:
            out.append(self.parent[out[-1]])
        return out

    @classmethod
    def parse(cls, text):
        nodes = {}
        for line in text.splitlines():
            if not line.strip():
                continue
            synset, parent, gloss = line.split("\t")
            nodes[synset] = (gloss.split(), None if parent == "-" else parent)
        return cls(nodes)

    @classmethod
    def bundled(cls):
        return cls.parse(_asset_text("taxonomy.tsv"))


class ObjectSynsetMap:
    """Category label -> synset; total over the category table."""

    def __init__(self, mapping, categories: CategoryTable, taxonomy: Taxonomy):
        for q in categories:
            if q not in mapping:
                raise DataError(f"category {q!r} missing from object synset map")
        for q, s in mapping.items():
            if s not in taxonomy:
                raise DataError(f"synset {s!r} for {q!r} not in taxonomy")
        self.mapping = dict(mapping)
        self.categories = categories

    def synset_of(self, label):
        return self.mapping[label]

    @classmethod
    def parse(cls, text, categories, taxonomy):
        mapping = {}
        for line in text.splitlines():
            if not line.strip():
                continue
            label, synset = line.split("\t")
            mapping[label] = synset
        return cls(mapping, categories, taxonomy)

    @classmethod
    def bundled(cls, categories, taxonomy):
        return cls.parse(_asset_text("object_synsets.tsv"), categories, taxonomy)


LANDMARK = "landmark"
TURN_LEFT = "turn_left"
TURN_RIGHT = "turn_right"


@dataclass(frozen=True)
class KeyComponent:
    """One ordered instruction element: a landmark category or a turn."""

    kind: str  # landmark | turn_left | turn_right
    category_id: int | None
    token_index: int

    @classmethod
    def landmark(cls, category_id, token_index):
        return cls(LANDMARK, category_id, token_index)

    @classmethod
    def turn(cls, direction, token_index):
        return cls(TURN_LEFT if direction == "left" else TURN_RIGHT, None, token_index)

    def to_json(self):
        d = {"kind": self.kind, "token_index": self.token_index}
        if self.kind == LANDMARK:
            d["category_id"] = self.category_id
        return d


class InstructionParser:
    """Bundles the lexicon, taxonomy, category set, and stopword list."""

    def __init__(self, lexicon=None, taxonomy=None, categories=None, object_synsets=None,
                 stopwords=None, gamma=GAMMA, window=TURN_WINDOW):
        self.lexicon = lexicon or Lexicon.bundled()
        self.taxonomy = taxonomy or Taxonomy.bundled()
        self.categories = categories or CategoryTable.bundled()
        self.object_synsets = object_synsets or ObjectSynsetMap.bundled(
            self.categories, self.taxonomy
        )
        if stopwords is None:
            stopwords = _asset_text("stopwords.txt").split()
        self.stopwords = frozenset(stopwords)
        self.gamma = gamma
        self.window = window
        self._category_synsets = [
            self.object_synsets.synset_of(q) for q in self.categories
        ]
        self._nearest_cache = {}

    # -- tagging ---------------------------------------------------------------

    def pos_tag(self, text):
        """Lowercased tokenization with rule-based tags.

        Punctuation tokens are dropped but still delimit clauses; a
        clause-initial token with any verb reading is tagged VB.
        Unknown words default to NN.
        """
        if not text or not text.strip():
            raise DataError("empty instruction text")
        tagged = []
        clause_start = True
        for raw in _TOKEN_RE.findall(text.lower()):
            if raw in _CLAUSE_BREAKERS:
                clause_start = True
                continue
            tags = self.lexicon.tags(raw)
            if clause_start and any(t in VERB_TAGS for t in tags):
                tag = "VB"
            elif tags:
                tag = tags[0]
            else:
                tag = "NN"
            tagged.append((raw, tag))
            clause_start = raw in _CLAUSE_HEADS
        return tagged

    # -- word senses ------------------------------------------------------------

    def wsd_lesk(self, word, context):
        """Pick the sense whose gloss overlaps the context most.

        Ties (including all-zero overlap) go to the first-listed synset,
        which the lexicon orders most-frequent first.
        """
        synsets = self.lexicon.synsets(word)
        if not synsets:
            raise DataError(f"word {word!r} has no synsets in the lexicon")
        context_set = {w for w in context if w not in self.stopwords}
        best, best_overlap = synsets[0], -1
        for s in synsets:
            gloss = {w for w in self.taxonomy.gloss[s] if w not in self.stopwords}
            overlap = len(gloss & context_set)
            if overlap > best_overlap:
                best, best_overlap = s, overlap
        return best

    def wu_palmer(self, s1, s2):
        """2 * depth(LCA) / (depth(s1) + depth(s2)), root depth 1."""
        tax = self.taxonomy
        if s1 not in tax or s2 not in tax:
            raise DataError(f"unknown synset in ({s1!r}, {s2!r})")
        anc1 = set(tax.ancestors(s1))
        lca = next(a for a in tax.ancestors(s2) if a in anc1)
        return 2.0 * tax.depth[lca] / (tax.depth[s1] + tax.depth[s2])

    def nearest_label(self, synset):
        """Most similar category: argmax Wu-Palmer, ties to the smaller id."""
        cached = self._nearest_cache.get(synset)
        if cached is not None:
            return cached
        best_id, best_score = 0, -1.0
        for cid, cat_syn in enumerate(self._category_synsets):
            score = self.wu_palmer(synset, cat_syn)
            if score > best_score:
                best_id, best_score = cid, score
        self._nearest_cache[synset] = (best_id, best_score)
        return best_id, best_score

    # -- extraction --------------------------------------------------------------

    def extract_key_components(self, text, gamma=None, window=None):
        """Ordered landmark/turn sequence from one instruction.

        Nouns go through WSD and taxonomy matching and survive only
        above the similarity threshold. Verbs open a short window in
        which a bare "left"/"right" (not modifying a following noun,
        unless that noun is "turn") becomes a turn component.
        """
        gamma = self.gamma if gamma is None else gamma
        window = self.window if window is None else window
        tagged = self.pos_tag(text)
        tokens = [w for w, _ in tagged]
        components = []
        seen_directions = set()
        for i, (word, tag) in enumerate(tagged):
            if tag in NOUN_TAGS:
                if not self.lexicon.synsets(word):
                    continue  # unknown noun, nothing to match
                sense = self.wsd_lesk(word, tokens)
                category_id, score = self.nearest_label(sense)
                if score > gamma:
                    components.append(KeyComponent.landmark(category_id, i))
            elif tag in VERB_TAGS:
                for j in range(i + 1, min(i + window, len(tagged) - 1) + 1):
                    follower = tagged[j][0]
                    if follower not in ("left", "right"):
                        continue
                    if j not in seen_directions:
                        # consecutive verbs may share a window; each
                        # direction word fires at most once
                        seen_directions.add(j)
                        if j + 1 >= len(tagged):
                            nxt_tag, nxt_text = None, None
                        else:
                            nxt_text, nxt_tag = tagged[j + 1]
                        if nxt_tag not in NOUN_TAGS or nxt_text == "turn":
                            components.append(KeyComponent.turn(follower, j))
                    break  # stop after the first direction word either way
        return components


def load_fixture_corpus():
    """Bundled (instruction, expected components) pairs.

    Components come back as canonical strings: a category label for
    landmarks, else turn_left / turn_right.
    """
    corpus = []
    for line in _asset_text("parser_fixtures.tsv").splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        instruction, _, expected = line.partition("\t")
        corpus.append((instruction,
                       [c for c in expected.strip().split(",") if c]))
    return corpus


_DEFAULT_PARSER = None


def default_parser() -> InstructionParser:
    """Shared parser over the bundled assets (loaded once per process)."""
    global _DEFAULT_PARSER
    if _DEFAULT_PARSER is None:
        _DEFAULT_PARSER = InstructionParser()
    return _DEFAULT_PARSER
