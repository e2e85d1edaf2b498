"""
What the model sees
===================

Renders the context-only and market-conditioned prompts for one sample
contract, then parses a few typical model replies.
"""

from pathlib import Path

from mentioncast import load_dataset
from mentioncast.evidence import ContextVariant, FixtureNewsProvider, build_context
from mentioncast.gateway import MCP, PromptRegime, parse_score, render_prompt
from mentioncast.storage import TranscriptStore

SAMPLE = Path(__file__).resolve().parents[1] / "data" / "sample"

instances = load_dataset(SAMPLE / "dataset.jsonl")
inst = next(i for i in instances if i.keyword == "Tariff" and i.company == "KO")
store = TranscriptStore(SAMPLE / "transcripts", instances)
prior = store.read(store.prior_event(inst))
news = FixtureNewsProvider(SAMPLE / "news.jsonl").fetch(inst.company, inst.cutoff_time)

ctx = build_context(ContextVariant.TRANSCRIPT_AND_NEWS, prior, news, inst.cutoff_time)
print(render_prompt(PromptRegime.context_only(ContextVariant.TRANSCRIPT_AND_NEWS),
                    inst.keyword, inst.company, ctx))
print("=" * 72)
print(render_prompt(MCP, inst.keyword, inst.company, ctx, market_prob=inst.market_prob))
print("=" * 72)

# replies the parser accepts; each maps to an integer score on 0..100
for reply in ['{"probability": 35}', "```json\n{\"probability\": 60}\n```", "72", "18%"]:
    print(repr(reply), "->", parse_score(reply))
