"""Word-level tokenizer with atomic structure markers.

Text is split on whitespace, so the four structure markers used by the
emitted training files (`<CAP>`, `<R>`, `<C>`, `<CoT>`) are single vocab
entries and can never be split across subwords.
"""

import json
from pathlib import Path

PAD, BOS, EOS, UNK = "<pad>", "<bos>", "<eos>", "<unk>"
SPECIAL_TOKENS = ("<CAP>", "<R>", "<C>", "<CoT>")
_RESERVED = (PAD, BOS, EOS, UNK) + SPECIAL_TOKENS


class WordTokenizer:
    def __init__(self, vocab: dict[str, int]):
        for i, token in enumerate(_RESERVED):
            if vocab.get(token) != i:
                raise ValueError(f"reserved token {token!r} must have id {i}")
        self.vocab = dict(vocab)
        self.inverse = {i: t for t, i in self.vocab.items()}
        self.pad_id = vocab[PAD]
        self.bos_id = vocab[BOS]
        self.eos_id = vocab[EOS]
        self.unk_id = vocab[UNK]

    @classmethod
    def build(cls, texts) -> "WordTokenizer":
        words = sorted({w for text in texts for w in text.split()} - set(_RESERVED))
        vocab = {t: i for i, t in enumerate(_RESERVED)}
        for word in words:
            vocab[word] = len(vocab)
        return cls(vocab)

    def __len__(self):
        return len(self.vocab)

    def encode(self, text: str, max_len: int | None = None,
               add_bos: bool = False, add_eos: bool = False) -> list[int]:
        ids = [self.vocab.get(w, self.unk_id) for w in text.split()]
        if add_bos:
            ids = [self.bos_id] + ids
        if add_eos:
            ids = ids + [self.eos_id]
        return ids[:max_len] if max_len else ids

    def decode(self, ids) -> str:
        words = []
        for i in ids:
            if i in (self.pad_id, self.bos_id):
                continue
            if i == self.eos_id:
                break
            words.append(self.inverse.get(int(i), UNK))
        return " ".join(words)

    def save(self, path: Path) -> None:
        path.write_text(json.dumps(self.vocab, indent=0), encoding="utf-8")

    @classmethod
    def load(cls, path: Path) -> "WordTokenizer":
        return cls(json.loads(path.read_text(encoding="utf-8")))
