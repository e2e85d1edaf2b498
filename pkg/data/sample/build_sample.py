"""Regenerate the sample bundle in this directory.

Each of the 18 contracts is a (company, resolution date, keyword, market price
in percent, outcome) row modelled on listed earnings-mention markets. Every
transcript, news item and mock score is synthetic.

    python data/sample/build_sample.py
"""

import json
import random
from datetime import datetime, timedelta, timezone
from pathlib import Path

HERE = Path(__file__).resolve().parent

ROWS = [
    ("AAPL", "2025-07-31", "iPhone", 99, "YES"),
    ("AAPL", "2025-07-31", "China", 91, "YES"),
    ("AAPL", "2025-07-31", "M3", 47, "NO"),
    ("AAPL", "2025-07-31", "Streaming", 36, "YES"),
    ("NVDA", "2025-08-28", "AI", 98, "YES"),
    ("NVDA", "2025-08-28", "Blackwell", 85, "YES"),
    ("NVDA", "2025-08-28", "China", 72, "YES"),
    ("TSLA", "2025-07-22", "Robotaxi", 67, "YES"),
    ("TSLA", "2025-07-22", "Cybertruck", 82, "YES"),
    ("TSLA", "2025-07-22", "FSD", 91, "YES"),
    ("NFLX", "2025-07-17", "Ad Tier", 79, "YES"),
    ("NFLX", "2025-07-17", "Squid Game", 73, "YES"),
    ("AMZN", "2025-08-01", "AWS", 99, "YES"),
    ("AMZN", "2025-08-01", "Prime", 95, "YES"),
    ("AMZN", "2025-08-01", "Tariff", 58, "YES"),
    ("KO", "2025-10-22", "China", 65, "YES"),
    ("KO", "2025-10-22", "Tariff", 42, "NO"),
    ("KO", "2025-10-22", "Cane Sugar", 31, "NO"),
]

PRIOR_CALLS = {
    "AAPL": "2025-05-01",
    "NVDA": "2025-05-28",
    "TSLA": "2025-04-22",
    "NFLX": "2025-04-17",
    "AMZN": "2025-05-01",
    "KO": "2025-07-22",
}

PRIOR_TEXT = {
    "AAPL": "Good afternoon. Revenue grew across products, led by iPhone. Services set a record, "
            "and our streaming service added new titles. Greater China was stable. Our Macs with "
            "M4 chips were well received.",
    "NVDA": "Data center revenue was a record, driven by AI demand. Blackwell is ramping. Export "
            "restrictions affected our sales to China this quarter.",
    "TSLA": "Deliveries were lower than a year ago. We expect to launch Robotaxi service in Austin "
            "in June. FSD supervised continues to improve. Cybertruck production is steady.",
    "NFLX": "Engagement remained healthy. Our ad tier continues to scale, and we are excited for the "
            "final season of Squid Game.",
    "AMZN": "AWS grew 17 percent. Prime members enjoyed faster delivery speeds. We are watching "
            "tariff developments closely.",
    "KO": "Volume grew in several markets, including China. We will introduce a product made with "
          "U.S. cane sugar later this year. Tariff impacts have been manageable.",
}

POST_TEXT = {
    "AAPL": "Thank you. iPhone revenue grew double digits. We saw growth in Greater China. Streaming "
            "engagement on our platform hit new highs. Our M4 lineup shipped broadly.",
    "NVDA": "AI infrastructure demand remains extraordinary. Blackwell was our fastest ramp. We had no "
            "H20 sales to customers in China this quarter.",
    "TSLA": "We launched Robotaxi in Austin. Cybertruck deliveries continued. FSD adoption is rising.",
    "NFLX": "Revenue grew 16 percent. The Ad Tier reached new advertisers. Squid Game was our most "
            "watched season ever.",
    "AMZN": "AWS growth accelerated. Prime Day was our biggest ever. We have not seen tariff-driven "
            "demand softness, and tariff costs were contained.",
    "KO": "Our performance in China was solid. We remain focused on affordability across our "
          "portfolio and on marketing investment.",
}

NEWS = {
    "AAPL": [("Apple readies iPhone 17 launch", "Suppliers ramp production ahead of fall event.", "Reuters"),
             ("Apple faces pressure in China", "Local rivals gain share in smartphones.", "Bloomberg"),
             ("Apple TV+ adds sports rights", "The streaming service expands its catalogue.", "Variety")],
    "NVDA": [("Nvidia Blackwell shipments accelerate", "Cloud providers expand orders.", "Reuters"),
             ("US weighs chip export licences for China", "H20 sales may resume.", "FT")],
    "TSLA": [("Tesla Robotaxi pilot starts in Austin", "Limited rides with safety monitors.", "Reuters"),
             ("Cybertruck recall announced", "Panel issue affects thousands of vehicles.", "AP")],
    "NFLX": [("Netflix ad tier passes new milestone", "Advertisers sign upfront deals.", "WSJ"),
             ("Squid Game finale breaks records", "Viewing hours top charts.", "Variety")],
    "AMZN": [("AWS signs major AI deal", "Cloud unit lands multiyear contract.", "CNBC"),
             ("Amazon sellers react to tariffs", "Some raise prices on imported goods.", "Reuters"),
             ("Prime Day extended to four days", "Longest event ever.", "The Verge")],
    "KO": [("Coca-Cola to launch cane sugar Coke", "Product arrives this fall in the US.", "CNBC"),
           ("Coca-Cola China bottler expands", "New plant opens in Sichuan.", "Reuters")],
}

METHODS = ("ctx_none", "ctx_n", "ctx_t", "ctx_tn", "plain_market", "mcp")
NOISE = {"ctx_none": 30, "ctx_n": 25, "ctx_t": 20, "ctx_tn": 18, "plain_market": 10, "mcp": 7}


def ts(date, hour=21):
    return datetime.fromisoformat(date).replace(hour=hour, tzinfo=timezone.utc)


def iso(dt):
    return dt.isoformat().replace("+00:00", "Z")


def slug(text):
    return text.lower().replace(" ", "-")


def main():
    rng = random.Random(20251015)
    (HERE / "transcripts").mkdir(exist_ok=True)
    (HERE / "post_call").mkdir(exist_ok=True)

    dataset = []
    for company, date, keyword, price, outcome in ROWS:
        resolution = ts(date)
        dataset.append({
            "schema_version": 1,
            "instance_id": f"{company}-{date}-{slug(keyword)}",
            "company": company,
            "event_id": f"{company}-{date}",
            "keyword": keyword,
            "cutoff_time": iso(resolution - timedelta(days=7)),
            "resolution_time": iso(resolution),
            "market_prob": price,
            "outcome": outcome,
        })
    with open(HERE / "dataset.jsonl", "w", encoding="utf-8") as fh:
        for row in dataset:
            fh.write(json.dumps(row) + "\n")

    with open(HERE / "transcripts" / "events.jsonl", "w", encoding="utf-8") as fh:
        for company, date in PRIOR_CALLS.items():
            fh.write(json.dumps({"event_id": f"{company}-{date}", "company": company,
                                 "call_time": iso(ts(date))}) + "\n")
    for company, date in PRIOR_CALLS.items():
        (HERE / "transcripts" / f"{company}-{date}.txt").write_text(PRIOR_TEXT[company] + "\n", encoding="utf-8")
    for company, date, *_ in ROWS:
        (HERE / "post_call" / f"{company}-{date}.txt").write_text(POST_TEXT[company] + "\n", encoding="utf-8")

    cutoffs = {}
    for row in dataset:
        cutoffs[row["company"]] = datetime.fromisoformat(row["cutoff_time"].replace("Z", "+00:00"))
    with open(HERE / "news.jsonl", "w", encoding="utf-8") as fh:
        for company, items in NEWS.items():
            for k, (title, snippet, source) in enumerate(items):
                published = cutoffs[company] - timedelta(days=3 * k + 1, hours=k)
                fh.write(json.dumps({"title": title, "snippet": snippet, "source": source,
                                     "published_at": iso(published), "company": company}) + "\n")
            # dated after the cutoff; must never reach a prompt
            fh.write(json.dumps({"title": f"{company} earnings preview: what to expect",
                                 "snippet": "Published after the forecast cutoff.", "source": "Wire",
                                 "published_at": iso(cutoffs[company] + timedelta(days=2)),
                                 "company": company}) + "\n")

    with open(HERE / "mock_scores.jsonl", "w", encoding="utf-8") as fh:
        for row in dataset:
            truth = 100 if row["outcome"] == "YES" else 0
            for method in METHODS:
                if method == "mcp":
                    centre = 0.8 * row["market_prob"] + 0.2 * truth
                elif method == "plain_market":
                    centre = 0.6 * row["market_prob"] + 0.2 * truth + 10
                else:
                    centre = 55 + 0.2 * (truth - 50)
                score = int(round(min(100, max(0, centre + rng.gauss(0, NOISE[method])))))
                fh.write(json.dumps({"instance_id": row["instance_id"], "method": method,
                                     "score": score}) + "\n")


if __name__ == "__main__":
    main()
