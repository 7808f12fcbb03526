"""End-to-end staged pipeline with resumable on-disk artifacts.

Stage order: ingest, graph, component, communities, sentinels, domains,
cluster, topics, rates, similarity, adf, lsa, stats. Every stage persists
its artifact; existing artifacts are loaded instead of recomputed, so
deleting a downstream file and rerunning rebuilds exactly that part.
Given a fixed seed the whole artifact tree is byte-stable.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from datetime import date, timedelta
from pathlib import Path
from typing import Mapping, Sequence

from . import community as community_mod
from . import domains as domains_mod
from . import graph as graph_mod
from . import lsa as lsa_mod
from . import similarity as similarity_mod
from . import stats as stats_mod
from . import topics as topics_mod
from .config import PipelineConfig
from .errors import SentinetError, StageError
from .ingest import TweetRecord, load_wordlist, normalize_text, read_corpus, write_corpus
from .sentinel import activity, ascii_language_filter, read_roster, select_sentinels, write_roster

ARTIFACTS = {
    "ingest": ("records.jsonl", "ingest_meta.json"),
    "graph": ("graph.edges",),
    "component": ("component.edges",),
    "communities": ("partition.txt",),
    "sentinels": ("sentinels.txt",),
    "domains": ("domain_matrix.csv",),
    "cluster": ("domain_scores.csv", "domain_loadings.csv"),
    "topics": ("topic_counts.csv",),
    "rates": ("rates.csv", "rates_daily.csv"),
    "similarity": ("similarity.csv",),
    "adf": ("adf.txt",),
    "lsa": ("lsa_drivers.json",),
    "stats": ("stats.json",),
    "meta": ("run_meta.json",),
}


@dataclass
class PipelineResult:
    output_dir: Path
    artifacts: dict[str, Path]
    summary: dict


def run_pipeline(config: PipelineConfig) -> PipelineResult:
    runner = _Runner(config)
    return runner.run()


class _Runner:
    def __init__(self, config: PipelineConfig):
        self.config = config
        self.out = Path(config.output_dir)
        self.out.mkdir(parents=True, exist_ok=True)
        self.stopwords = load_wordlist(config.stopwords_path())
        self.shorteners = load_wordlist(config.shorteners_path())
        self.lexicons = topics_mod.load_lexicons(config.lexicon_dir)
        self.summary: dict = {}

    def path(self, name: str) -> Path:
        return self.out / name

    def _have(self, stage: str) -> bool:
        return all(self.path(name).exists() for name in ARTIFACTS[stage])

    def _wrap(self, stage: str, func):
        try:
            return func()
        except SentinetError as exc:
            if isinstance(exc, StageError):
                raise
            raise StageError(stage, str(self.path(ARTIFACTS[stage][0])), exc) from exc
        except Exception as exc:
            raise StageError(stage, str(self.path(ARTIFACTS[stage][0])), exc) from exc

    # ---- stages -------------------------------------------------------

    def stage_ingest(self) -> list[TweetRecord]:
        def compute():
            if self._have("ingest"):
                result = read_corpus(self.path("records.jsonl"))
                meta = json.loads(self.path("ingest_meta.json").read_text())
                self.summary["records"] = len(result.records)
                self.summary["skipped_lines"] = meta["skipped_lines"]
                return result.records
            result = read_corpus(self.config.corpus)
            records = [r for r in result.records if self._in_window(r)]
            if not records:
                from .errors import EmptyCorpusError

                raise EmptyCorpusError("no records inside the observation window")
            write_corpus(records, self.path("records.jsonl"))
            self._write_json(
                "ingest_meta.json",
                {"skipped_lines": result.skipped, "records": len(records)},
            )
            self.summary["records"] = len(records)
            self.summary["skipped_lines"] = result.skipped
            return records

        return self._wrap("ingest", compute)

    def _in_window(self, record: TweetRecord) -> bool:
        return self.config.window_start <= record.day <= self.config.window_end

    def stage_graph(self, records) -> graph_mod.RetweetGraph:
        def compute():
            if self._have("graph"):
                return graph_mod.read_edges(self.path("graph.edges"))
            built = graph_mod.build_retweet_graph(records)
            graph_mod.write_edges(built, self.path("graph.edges"))
            return built

        return self._wrap("graph", compute)

    def stage_component(self, built) -> graph_mod.RetweetGraph:
        def compute():
            if self._have("component"):
                return graph_mod.read_edges(self.path("component.edges"))
            component = graph_mod.largest_component(built)
            graph_mod.write_edges(component, self.path("component.edges"))
            return component

        return self._wrap("component", compute)

    def stage_communities(self, component) -> community_mod.Partition:
        def compute():
            if self._have("communities"):
                return community_mod.read_partition(self.path("partition.txt"))
            detected = community_mod.louvain(component, seed=self.config.seed)
            # string labels keep fresh and resumed runs byte-identical
            partition = community_mod.Partition.from_assignment(
                {node: str(label) for node, label in detected.assignment.items()}
            )
            community_mod.write_partition(partition, self.path("partition.txt"))
            return partition

        return self._wrap("communities", compute)

    def stage_sentinels(self, component, partition, records):
        def compute():
            if self._have("sentinels"):
                return read_roster(self.path("sentinels.txt"))
            if self.config.language_filter == "ascii":
                by_author: dict[str, list[TweetRecord]] = {}
                for record in records:
                    by_author.setdefault(record.author_id, []).append(record)
                predicate = ascii_language_filter(
                    by_author,
                    english_threshold=self.config.english_threshold,
                    seed=self.config.seed,
                )
            else:
                predicate = None
            sentinels = select_sentinels(
                component,
                partition,
                k=self.config.sentinel_k,
                top_m=self.config.top_m,
                language_filter=predicate,
            )
            write_roster(sentinels, self.path("sentinels.txt"))
            return {
                label: sentinels.members[label] for label in sentinels.considered
            }

        return self._wrap("sentinels", compute)

    def stage_domains(self, roster, records) -> domains_mod.DomainMatrix:
        def compute():
            if self._have("domains"):
                return domains_mod.read_matrix_csv(self.path("domain_matrix.csv"))
            account_community = _account_community(roster)
            baseline: dict[str, list[TweetRecord]] = {
                label: [] for label in roster
            }
            for record in records:
                community = account_community.get(record.author_id)
                if community is None:
                    continue
                if record.created_at < self.config.split:
                    baseline[community].append(record)
            matrix = domains_mod.domain_frequency_matrix(
                baseline, self.shorteners, min_count=self.config.domain_min_count
            )
            domains_mod.write_matrix_csv(matrix, self.path("domain_matrix.csv"))
            return matrix

        return self._wrap("domains", compute)

    def stage_cluster(self, matrix):
        def compute():
            if self._have("cluster"):
                return _read_scores_csv(self.path("domain_scores.csv"))
            scores = domains_mod.first_principal_component(
                matrix, anchor_domain=self.config.anchor_domain
            )
            clusters = domains_mod.cluster_scores(
                scores, k=self.config.score_clusters, method=self.config.linkage
            )
            domains_mod.write_scores_csv(scores, clusters, self.path("domain_scores.csv"))
            domains_mod.write_loadings_csv(scores, self.path("domain_loadings.csv"))
            return (
                {label: scores.scores[label] for label in scores.scores},
                {label: clusters.assignment[label] for label in clusters.assignment},
            )

        return self._wrap("cluster", compute)

    def stage_topics(self, roster, records):
        def compute():
            account_community = _account_community(roster)
            by_community: dict[str, list[TweetRecord]] = {label: [] for label in roster}
            for record in records:
                community = account_community.get(record.author_id)
                if community is not None:
                    by_community[community].append(record)
            matched = {
                community: topics_mod.filter_topic_tree(recs, self.lexicons)
                for community, recs in by_community.items()
            }
            if not self._have("topics"):
                with open(self.path("topic_counts.csv"), "w", encoding="utf-8") as handle:
                    handle.write("topic,community,count\n")
                    for topic in sorted(self.lexicons):
                        for community in sorted(matched, key=str):
                            handle.write(
                                f"{topic},{community},{len(matched[community][topic])}\n"
                            )
            return by_community, matched

        return self._wrap("topics", compute)

    def stage_rates(self, roster, by_community, matched, cluster_of):
        def compute():
            if self._have("rates"):
                return None
            window = (self.config.window_start, self.config.window_end)
            records_by_account: dict[str, list[TweetRecord]] = {}
            for community, recs in by_community.items():
                for record in recs:
                    records_by_account.setdefault(record.author_id, []).append(record)
            for label, entries in roster.items():
                for account, _ in entries:
                    records_by_account.setdefault(account, [])
            ledger = activity(records_by_account, window)
            community_accounts = {
                label: [account for account, _ in entries]
                for label, entries in roster.items()
            }
            cluster_accounts: dict[str, list[str]] = {}
            for label, accounts in community_accounts.items():
                cluster = str(cluster_of[label])
                cluster_accounts.setdefault(cluster, []).extend(accounts)
            counts = {
                topic: {
                    community: len(matched[community][topic])
                    for community in sorted(matched, key=str)
                }
                for topic in sorted(self.lexicons)
            }
            daily_counts: dict[str, dict[str, dict[date, int]]] = {}
            for topic in sorted(self.lexicons):
                per_cluster: dict[str, dict[date, int]] = {}
                for community in sorted(matched, key=str):
                    cluster = str(cluster_of[community])
                    bucket = per_cluster.setdefault(cluster, {})
                    for record in matched[community][topic]:
                        bucket[record.day] = bucket.get(record.day, 0) + 1
                daily_counts[topic] = per_cluster
            table = topics_mod.rate_table(
                counts,
                ledger,
                community_accounts,
                daily_counts=daily_counts,
                cluster_accounts=cluster_accounts,
            )
            topics_mod.write_rates_csv(table, self.path("rates.csv"))
            topics_mod.write_daily_csv(table, self.path("rates_daily.csv"))
            return table

        return self._wrap("rates", compute)

    def stage_similarity(self, matched, cluster_of):
        def compute():
            if self._have("similarity"):
                return similarity_mod.read_series_csv(self.path("similarity.csv"))
            covid_by_community = {
                community: topic_records["covid"]
                for community, topic_records in matched.items()
            }
            day_docs = similarity_mod.build_community_day_docs(
                covid_by_community, self.stopwords
            )
            days = _window_days(self.config.window_start, self.config.window_end)
            members: dict[str, list[str]] = {}
            for community, cluster in cluster_of.items():
                members.setdefault(str(cluster), []).append(community)
            series_list = []
            for left, right in _cluster_pairs(sorted(members)):
                series_list.append(
                    similarity_mod.similarity_series(
                        day_docs,
                        sorted(members[left]),
                        sorted(members[right]),
                        days,
                        pair=(left, right),
                    )
                )
            similarity_mod.write_series_csv(
                series_list,
                self.path("similarity.csv"),
                threshold=self.config.burst_threshold,
                min_history=self.config.min_history,
            )
            return series_list

        return self._wrap("similarity", compute)

    def stage_adf(self, series_list):
        def compute():
            if self._have("adf"):
                return None
            lines = []
            for series in series_list:
                valid = [v for v in series.values if v is not None]
                pair_name = f"{series.pair[0]}-{series.pair[1]}"
                try:
                    result = similarity_mod.adf_test(valid, self.config.adf_alpha)
                    lines.append(
                        f"pair {pair_name}: statistic={result.statistic:.4f} "
                        f"critical={result.critical_value:.2f} "
                        f"alpha={result.alpha:g} nobs={result.nobs} -> {result.verdict}"
                    )
                except SentinetError as exc:
                    lines.append(f"pair {pair_name}: not testable ({exc})")
            self.path("adf.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
            return None

        return self._wrap("adf", compute)

    def stage_lsa(self, series_list, matched, cluster_of):
        def compute():
            if self._have("lsa"):
                return json.loads(self.path("lsa_drivers.json").read_text())
            members: dict[str, list[str]] = {}
            for community, cluster in cluster_of.items():
                members.setdefault(str(cluster), []).append(community)
            token_cache: dict[str, dict[date, list[tuple[str, object]]]] = {}
            for community, topic_records in matched.items():
                per_day: dict[date, list] = {}
                for record in topic_records["covid"]:
                    per_day.setdefault(record.day, []).append(
                        (record.tweet_id, normalize_text(record.text, self.stopwords))
                    )
                token_cache[community] = per_day
            events = []
            flag_count = 0
            for series in series_list:
                flagged = sorted(
                    similarity_mod.flag_days(
                        series,
                        threshold=self.config.burst_threshold,
                        min_history=self.config.min_history,
                    )
                )
                for day in flagged:
                    flag_count += 1
                    tweets_a = {
                        community: token_cache[community].get(day, [])
                        for community in sorted(members[series.pair[0]])
                    }
                    tweets_b = {
                        community: token_cache[community].get(day, [])
                        for community in sorted(members[series.pair[1]])
                    }
                    extraction_a = lsa_mod.lsa_topical_tweets(
                        [t for c in sorted(tweets_a) for t in tweets_a[c]],
                        k=self.config.lsa_k,
                        day=day,
                        cluster=series.pair[0],
                    )
                    extraction_b = lsa_mod.lsa_topical_tweets(
                        [t for c in sorted(tweets_b) for t in tweets_b[c]],
                        k=self.config.lsa_k,
                        day=day,
                        cluster=series.pair[1],
                    )
                    confirmation = lsa_mod.confirm_drivers(
                        series,
                        day,
                        tweets_a,
                        tweets_b,
                        extraction_a,
                        extraction_b,
                        match_threshold=self.config.match_threshold,
                        flag_threshold=self.config.burst_threshold,
                        min_history=self.config.min_history,
                    )
                    events.append(
                        {
                            "day": day.isoformat(),
                            "pair": f"{series.pair[0]}-{series.pair[1]}",
                            "burst_score": similarity_mod.burst_score(
                                series, day, self.config.min_history
                            ),
                            "topical": {
                                series.pair[0]: sorted(extraction_a.topical_ids),
                                series.pair[1]: sorted(extraction_b.topical_ids),
                            },
                            "singular_values": {
                                series.pair[0]: list(extraction_a.singular_values),
                                series.pair[1]: list(extraction_b.singular_values),
                            },
                            "common": {
                                series.pair[0]: sorted(confirmation.common_a),
                                series.pair[1]: sorted(confirmation.common_b),
                            },
                            "recomputed_similarity": confirmation.recomputed_s,
                            "recomputed_burst_score": confirmation.recomputed_h,
                            "is_driver": confirmation.is_driver,
                        }
                    )
            report = {
                "flag_threshold": self.config.burst_threshold,
                "min_history": self.config.min_history,
                "match_threshold": self.config.match_threshold,
                "events": events,
            }
            self._write_json("lsa_drivers.json", report)
            self.summary["flagged_events"] = flag_count
            return report

        return self._wrap("lsa", compute)

    def stage_stats(self):
        def compute():
            if self.config.contingency is None and self.config.coding is None:
                return None
            if self._have("stats"):
                return json.loads(self.path("stats.json").read_text())
            payload: dict = {}
            if self.config.contingency is not None:
                table = stats_mod.ContingencyTable.read_csv(self.config.contingency)
                result = stats_mod.chi_square(table)
                payload["chi_square"] = {
                    "statistic": result.statistic,
                    "df": result.df,
                    "p_value": result.p_value,
                }
            if self.config.coding is not None:
                matrix = stats_mod.CodingMatrix.read_csv(self.config.coding)
                payload["krippendorff_alpha"] = stats_mod.krippendorff_alpha(matrix)
            self._write_json("stats.json", payload)
            return payload

        return self._wrap("stats", compute)

    # ---- assembly -----------------------------------------------------

    def run(self) -> PipelineResult:
        records = self.stage_ingest()
        built = self.stage_graph(records)
        component = self.stage_component(built)
        partition = self.stage_communities(component)
        roster = self.stage_sentinels(component, partition, records)
        matrix = self.stage_domains(roster, records)
        _, cluster_of = self.stage_cluster(matrix)
        by_community, matched = self.stage_topics(roster, records)
        self.stage_rates(roster, by_community, matched, cluster_of)
        series_list = self.stage_similarity(matched, cluster_of)
        self.stage_adf(series_list)
        drivers = self.stage_lsa(series_list, matched, cluster_of)
        stats_payload = self.stage_stats()

        self.summary.update(
            {
                "nodes": component.n,
                "total_retweets": component.w,
                "communities": len(partition.communities),
                "sentinel_communities": len(roster),
                "sentinel_accounts": sum(len(v) for v in roster.values()),
                "clusters": len(set(cluster_of.values())),
                "flagged_events": len(drivers["events"]),
                "confirmed_drivers": sum(
                    1 for event in drivers["events"] if event["is_driver"]
                ),
            }
        )
        meta = {
            "seed": self.config.seed,
            "sd_convention": similarity_mod.SD_CONVENTION,
            "burst_threshold": self.config.burst_threshold,
            "min_history": self.config.min_history,
            "summary": self.summary,
        }
        self._write_json("run_meta.json", meta)
        artifacts = {
            name: self.path(files[0]) for name, files in ARTIFACTS.items()
        }
        if stats_payload is None:
            artifacts.pop("stats", None)
        return PipelineResult(
            output_dir=self.out, artifacts=artifacts, summary=self.summary
        )

    def _write_json(self, name: str, payload) -> None:
        self.path(name).write_text(
            json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
            encoding="utf-8",
        )


def _account_community(roster: Mapping[str, Sequence[tuple[str, int]]]) -> dict[str, str]:
    return {
        account: label for label, entries in roster.items() for account, _ in entries
    }


def _window_days(start: date, end: date) -> list[date]:
    return [start + timedelta(days=i) for i in range((end - start).days + 1)]


def _cluster_pairs(names: Sequence[str]) -> list[tuple[str, str]]:
    return [
        (names[i], names[j])
        for i in range(len(names))
        for j in range(i + 1, len(names))
    ]


def _read_scores_csv(path: Path):
    import csv

    with open(path, newline="", encoding="utf-8") as handle:
        rows = list(csv.DictReader(handle))
    scores = {row["community"]: float(row["score"]) for row in rows}
    clusters = {row["community"]: int(row["cluster"]) for row in rows}
    return scores, clusters


def stratified_coding_sample(
    records_by_cluster_topic: Mapping[tuple[str, str], Sequence[tuple[str, TweetRecord]]],
    per_stratum: int = 100,
    seed: int = 0,
) -> list[tuple[str, str, str, TweetRecord]]:
    """Seeded coding sample: up to ``per_stratum`` tweets per cluster-topic.

    Entries are (community, record) pairs; communities inside a stratum are
    balanced round-robin so one prolific community cannot dominate the
    sample. Returns (cluster, topic, community, record) tuples.
    """
    rng = random.Random(seed)
    sampled = []
    for (cluster, topic) in sorted(records_by_cluster_topic):
        entries = records_by_cluster_topic[(cluster, topic)]
        by_community: dict[str, list[TweetRecord]] = {}
        for community, record in entries:
            by_community.setdefault(community, []).append(record)
        queues = {}
        for community in sorted(by_community):
            pool = sorted(by_community[community], key=lambda r: r.tweet_id)
            rng.shuffle(pool)
            queues[community] = pool
        picked: list[tuple[str, TweetRecord]] = []
        while len(picked) < per_stratum and any(queues.values()):
            for community in sorted(queues):
                if queues[community] and len(picked) < per_stratum:
                    picked.append((community, queues[community].pop()))
        sampled.extend(
            (cluster, topic, community, record) for community, record in picked
        )
    return sampled
