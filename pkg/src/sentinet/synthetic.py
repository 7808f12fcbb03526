"""Deterministic synthetic corpus generator for pipeline exercises.

Builds a small retweet ecosystem: communities with hub accounts that every
member retweets daily, cluster-specific linked domains and phrasing, a
light mist of globally shared phrases that keeps inter-cluster similarity
positive but small, and one viral message copied verbatim across two
clusters on a chosen day. Useful for demos and end-to-end verification.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from datetime import date, datetime, time, timedelta, timezone

from .ingest import TweetRecord

GLOBAL_PHRASES = (
    "confirmed cases rising in several states today",
    "health officials urge caution heading into weekend",
    "hospital systems report steady admissions this week",
    "testing sites expand hours across the country",
    "researchers publish new findings on transmission timing",
    "schools weigh reopening plans for the fall",
    "travel guidance updated for returning passengers",
    "local leaders discuss relief funding next month",
    "scientists track variants emerging in other regions",
    "case counts dip slightly after holiday backlog",
)

CLUSTER_PHRASES = (
    (
        "new vaccine trial results encouraging scientists say",
        "volunteers needed for the coming vaccine study",
        "community clinics prepare distribution logistics carefully",
        "public health messaging must reach every neighborhood",
        "experts praise transparent reporting from state agencies",
        "relief package supports frontline workers and families",
        "contact tracing teams grow in three counties",
        "models suggest masks cut transmission substantially indoors",
    ),
    (
        "experts debate mask mandates in schools again",
        "business owners balance safety and staying open",
        "county boards argue over enforcement details tonight",
        "pundits split on timing of reopening phases",
        "analysts question the latest unemployment projections",
        "moderates call for compromise on relief spending",
        "columnists weigh tradeoffs of remote learning",
        "panel discusses liability rules for employers",
    ),
    (
        "pundits say covid death rate lower than flu",
        "skeptics question lockdown costs versus benefits loudly",
        "commentators blast media coverage of case numbers",
        "callers doubt official counts on radio shows",
        "hosts claim restrictions ignore economic damage entirely",
        "guests argue natural immunity gets dismissed unfairly",
        "viewers told to question every published model",
        "broadcasters mock latest guidance reversal from agencies",
    ),
)

CLUSTER_DOMAINS = (
    ("bluepress.com", "leftledger.com", "civicdaily.com"),
    ("middlemark.com", "plainwire.com", "centrepost.com"),
    ("redledger.com", "rightreport.com", "crimsonwire.com"),
)
SHARED_DOMAINS = ("wireservice.com", "newsnet.com")

# row c = cluster c's sampling weights over (left pool, middle pool,
# right pool, shared pool); middle mixes the extremes so the domain space
# is close to one-dimensional
DOMAIN_MIX = (
    (0.70, 0.10, 0.00, 0.20),
    (0.25, 0.30, 0.25, 0.20),
    (0.00, 0.10, 0.70, 0.20),
)

VIRAL_TEXT = (
    "breaking the cdc quietly revised covid fatality figures downward "
    "overnight shocking reporters nationwide"
)


@dataclass(frozen=True)
class SyntheticSpec:
    n_days: int = 30
    start: date = date(2020, 7, 1)
    communities_per_cluster: int = 3
    hubs_per_community: int = 15
    extra_accounts: int = 3
    viral_day_index: int = 24
    viral_clusters: tuple[int, int] = (1, 2)
    split_day_index: int = 20
    seed: int = 20
    originals_per_account: int = 2
    url_probability: float = 0.45
    global_phrase_probability: float = 0.30


@dataclass(frozen=True)
class GroundTruth:
    communities: tuple[str, ...]
    cluster_of_community: dict[str, int]
    accounts: dict[str, tuple[str, ...]]
    hubs: dict[str, tuple[str, ...]]
    viral_day: date
    viral_tweet_ids: tuple[str, ...]
    window: tuple[date, date]
    split: datetime


def generate_corpus(spec: SyntheticSpec = SyntheticSpec()) -> tuple[list[TweetRecord], GroundTruth]:
    rng = random.Random(spec.seed)
    n_clusters = len(CLUSTER_PHRASES)
    communities = tuple(
        f"c{i}" for i in range(n_clusters * spec.communities_per_cluster)
    )
    cluster_of = {
        name: i // spec.communities_per_cluster for i, name in enumerate(communities)
    }
    accounts = {
        name: tuple(
            f"{name}a{j:02d}"
            for j in range(spec.hubs_per_community + spec.extra_accounts)
        )
        for name in communities
    }
    hubs = {
        name: members[: spec.hubs_per_community] for name, members in accounts.items()
    }
    community_fillers = {
        name: tuple(f"{name}topic{t}" for t in range(12)) for name in communities
    }

    records: list[TweetRecord] = []
    viral_ids: list[str] = []
    serial = 0

    def stamp(day_index: int, minute: int) -> datetime:
        moment = datetime.combine(
            spec.start + timedelta(days=day_index), time(8, 0), tzinfo=timezone.utc
        )
        return moment + timedelta(minutes=minute % 600)

    def next_id() -> str:
        nonlocal serial
        serial += 1
        return f"t{serial:07d}"

    def compose_text(community: str) -> str:
        cluster = cluster_of[community]
        # one global phrase per tweet (sometimes two) keeps the day-to-day
        # inter-cluster baseline positive and fairly steady
        parts = ["covid"]
        parts.append(rng.choice(CLUSTER_PHRASES[cluster]))
        parts.append(rng.choice(GLOBAL_PHRASES))
        if rng.random() < spec.global_phrase_probability:
            parts.append(rng.choice(GLOBAL_PHRASES))
        parts.append(" ".join(rng.sample(community_fillers[community], 2)))
        return " ".join(parts)

    def maybe_url(community: str) -> tuple[str, ...]:
        if rng.random() >= spec.url_probability:
            return ()
        cluster = cluster_of[community]
        pools = (*CLUSTER_DOMAINS, SHARED_DOMAINS)
        pool = rng.choices(pools, weights=DOMAIN_MIX[cluster], k=1)[0]
        domain = rng.choice(pool)
        return (f"https://{domain}/{next_id()}",)

    for day_index in range(spec.n_days):
        for community in communities:
            for member in accounts[community]:
                minute = rng.randrange(0, 540)
                target = rng.choice([h for h in hubs[community] if h != member])
                records.append(
                    TweetRecord(
                        tweet_id=next_id(),
                        author_id=member,
                        created_at=stamp(day_index, minute),
                        text=f"rt @{target} {compose_text(community)}",
                        retweeted_author_id=target,
                        urls=(),
                    )
                )
                for _ in range(spec.originals_per_account):
                    records.append(
                        TweetRecord(
                            tweet_id=next_id(),
                            author_id=member,
                            created_at=stamp(day_index, minute + rng.randrange(1, 60)),
                            text=compose_text(community),
                            retweeted_author_id=None,
                            urls=maybe_url(community),
                        )
                    )
        # sparse chain of cross-community retweets keeps the graph connected
        if day_index % 7 == 3:
            for i in range(len(communities) - 1):
                source_hub = hubs[communities[i + 1]][0]
                bridge_author = accounts[communities[i]][-1]
                records.append(
                    TweetRecord(
                        tweet_id=next_id(),
                        author_id=bridge_author,
                        created_at=stamp(day_index, 590),
                        text=f"rt @{source_hub} {compose_text(communities[i])}",
                        retweeted_author_id=source_hub,
                        urls=(),
                    )
                )

    for cluster in spec.viral_clusters:
        for community in communities:
            if cluster_of[community] != cluster:
                continue
            for hub in hubs[community]:
                tweet_id = next_id()
                viral_ids.append(tweet_id)
                records.append(
                    TweetRecord(
                        tweet_id=tweet_id,
                        author_id=hub,
                        created_at=stamp(spec.viral_day_index, 300),
                        text=VIRAL_TEXT,
                        retweeted_author_id=None,
                        urls=(),
                    )
                )

    records.sort(key=lambda r: (r.created_at, r.tweet_id))
    truth = GroundTruth(
        communities=communities,
        cluster_of_community=cluster_of,
        accounts=accounts,
        hubs=hubs,
        viral_day=spec.start + timedelta(days=spec.viral_day_index),
        viral_tweet_ids=tuple(viral_ids),
        window=(spec.start, spec.start + timedelta(days=spec.n_days - 1)),
        split=datetime.combine(
            spec.start + timedelta(days=spec.split_day_index),
            time(0, 0),
            tzinfo=timezone.utc,
        ),
    )
    return records, truth
