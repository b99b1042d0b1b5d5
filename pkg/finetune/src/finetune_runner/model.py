"""Small GRU encoder-decoder used for desk-scale fine-tuning.

Deliberately tiny: this runner demonstrates the training objective and
file handoff, not the published accuracy numbers.
"""

import torch
from torch import nn


class Seq2Seq(nn.Module):
    def __init__(self, vocab_size: int, emb_dim: int = 64, hidden_dim: int = 128,
                 pad_id: int = 0):
        super().__init__()
        self.vocab_size = vocab_size
        self.emb_dim = emb_dim
        self.hidden_dim = hidden_dim
        self.embed = nn.Embedding(vocab_size, emb_dim, padding_idx=pad_id)
        self.encoder = nn.GRU(emb_dim, hidden_dim, batch_first=True)
        self.decoder = nn.GRU(emb_dim, hidden_dim, batch_first=True)
        self.out = nn.Linear(hidden_dim, vocab_size)

    def encode(self, src: torch.Tensor) -> torch.Tensor:
        _outputs, hidden = self.encoder(self.embed(src))
        return hidden

    def forward(self, src: torch.Tensor, tgt_in: torch.Tensor) -> torch.Tensor:
        hidden = self.encode(src)
        dec, _hidden = self.decoder(self.embed(tgt_in), hidden)
        return self.out(dec)

    @torch.no_grad()
    def greedy_decode(self, src: torch.Tensor, bos_id: int, eos_id: int,
                      max_len: int) -> list[int]:
        hidden = self.encode(src.unsqueeze(0))
        token = torch.tensor([[bos_id]], dtype=torch.long)
        out = []
        for _ in range(max_len):
            dec, hidden = self.decoder(self.embed(token), hidden)
            token = self.out(dec[:, -1]).argmax(dim=-1, keepdim=True)
            tid = int(token.item())
            if tid == eos_id:
                break
            out.append(tid)
        return out
