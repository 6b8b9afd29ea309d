"""
Experiment drivers. A churn experiment trains pairs of classifiers that differ only in their seeds and measures how
much their holdout predictions disagree, for every regulariser strength in a sweep. A retrieval experiment trains
dual encoders with each retrieval loss and measures recall, precision-recall AUC and the spread of the scores.

Every run is an independent :class:`churnkit.training.worker.Job` with explicit seeds, so runs can be spread over
worker processes without changing their results.
"""
import logging

import numpy as np
from cached_property import cached_property

from churnkit.churn import PairedPredictions, StabilityCounts, check_churn_err_bound, check_hellinger_sandwich, \
    error_rate, excess_soft_churn, hard_churn, soft_churn, stability_counts
from churnkit.divergence import l1, lp_dist, lp_dist_normalized
from churnkit.element import Element
from churnkit.evaluation import Histogram, ScoreProfile, high_score_fraction, histogram, pr_curve, recall_at_k, \
    score_distribution_profile
from churnkit.exceptions import InvalidInputError
from churnkit.losses.cross_example import cosine_scale, cosine_scores
from churnkit.losses.regularised import RegParams
from churnkit.training.datasets import Dataset, PairedDataset, gen_gaussian_blobs, gen_paired_embeddings
from churnkit.training.engine import CLASSIFICATION, TrainConfig, train
from churnkit.training.models import forward, predict_proba
from churnkit.training.worker import Job, JobOutcome, run_jobs

from typing import List, Optional, Sequence, Tuple

logger = logging.getLogger(__name__)

VARY = ('both', 'init', 'shuffle', 'none')

CHURN_METRICS = ('hard_churn', 'soft_churn', 'excess_soft_churn', 'l1_mean', 'l1norm_mean', 'l4_mean', 'l05norm_mean',
                 'err1', 'err2')

RETRIEVAL_METRICS = ('recall_at_1', 'recall_at_5', 'recall_at_10', 'pr_auc', 'envelope_width', 'high_score_fraction')

RECALL_CUTOFFS = (1, 5, 10)

# Cosine similarity above which a document counts as a confident match
HIGH_SCORE_COSINE = 0.6

INIT_STREAM = 0
SHUFFLE_STREAM = 1


def derive_seed(*path: int) -> int:
    """
    A 64-bit seed derived from a path of integers, like (base seed, pair, model, stream). Different paths give
    independent seeds.

    :param path: Nonnegative integers
    :return: The derived seed
    """
    return int(np.random.SeedSequence(list(path)).generate_state(1, dtype=np.uint64)[0])


def summarise(values: Sequence[float]) -> dict:
    """
    The mean and population standard deviation of a list of metric values.

    :param values: The values
    :return: A dictionary with mean and std, both None for an empty list
    """
    if not values:
        return {'mean': None, 'std': None}
    values = np.asarray(values, dtype=float)
    return {'mean': float(np.mean(values)), 'std': float(np.std(values))}


class BlobSpec(Element):
    """
    How to generate the Gaussian blob dataset of a churn experiment and split it into training and holdout samples.
    """

    def __init__(self, samples: int, dimensions: int, classes: int, separation: float, seed: int,
                 holdout_fraction: float = 0.2):
        self.samples = int(samples)
        self.dimensions = int(dimensions)
        self.classes = int(classes)
        self.separation = float(separation)
        self.seed = int(seed)
        self.holdout_fraction = float(holdout_fraction)

    @cached_property
    def splits(self) -> Tuple[Dataset, Dataset]:
        """
        The training and holdout sets
        """
        dataset = gen_gaussian_blobs(self.seed, self.samples, self.dimensions, self.classes, self.separation)
        return dataset.split(self.seed, self.holdout_fraction)


class PairedSpec(Element):
    """
    How to generate the paired dataset of a retrieval experiment. The first `pairs` pairs are for training, the
    holdout pairs and the distractor documents for evaluation.
    """

    def __init__(self, pairs: int, latent_dimensions: int, noise: float, holdout_pairs: int, seed: int,
                 distractors: int = 0, query_dimensions: Optional[int] = None, doc_dimensions: Optional[int] = None):
        self.pairs = int(pairs)
        self.latent_dimensions = int(latent_dimensions)
        self.noise = float(noise)
        self.holdout_pairs = int(holdout_pairs)
        self.seed = int(seed)
        self.distractors = int(distractors)
        self.query_dimensions = query_dimensions
        self.doc_dimensions = doc_dimensions

    @cached_property
    def splits(self) -> Tuple[PairedDataset, PairedDataset]:
        """
        The training and holdout sets
        """
        dataset = gen_paired_embeddings(self.seed, self.pairs + self.holdout_pairs, self.latent_dimensions,
                                        self.noise, self.query_dimensions, self.doc_dimensions, self.distractors)
        return dataset.split(self.pairs)


def pair_seeds(base_seed: int, pair: int, vary: str) -> Tuple[Tuple[int, int], Tuple[int, int]]:
    """
    The (init, shuffle) seeds of both models of a pair. The second model only gets its own seed for the factors that
    vary.

    :param base_seed: The base seed of the experiment
    :param pair: The index of the pair
    :param vary: 'both', 'init', 'shuffle' or 'none'
    :return: The seeds of the first and of the second model
    """
    if vary not in VARY:
        raise InvalidInputError("Vary must be one of {}".format(', '.join(VARY)))

    first = (derive_seed(base_seed, pair, 0, INIT_STREAM), derive_seed(base_seed, pair, 0, SHUFFLE_STREAM))
    second = (derive_seed(base_seed, pair, 1, INIT_STREAM) if vary in ('both', 'init') else first[0],
              derive_seed(base_seed, pair, 1, SHUFFLE_STREAM) if vary in ('both', 'shuffle') else first[1])
    return first, second


class PairRun(Element):
    """
    The holdout churn metrics of one pair of models. The logits of the first model and the per-sample L1 distances
    are kept for the histograms.
    """

    def __init__(self, alpha: float, pair: int, seeds: list, hard_churn: float, soft_churn: float,
                 excess_soft_churn: float, l1_mean: float, l1norm_mean: float, l4_mean: float, l05norm_mean: float,
                 err1: float, err2: float, bounds_hold: bool,
                 stability: StabilityCounts, logits=None, distances=None):
        self.alpha = float(alpha)
        self.pair = int(pair)
        self.seeds = seeds
        self.hard_churn = hard_churn
        self.soft_churn = soft_churn
        self.excess_soft_churn = excess_soft_churn
        self.l1_mean = l1_mean
        self.l1norm_mean = l1norm_mean
        self.l4_mean = l4_mean
        self.l05norm_mean = l05norm_mean
        self.err1 = err1
        self.err2 = err2
        self.bounds_hold = bounds_hold
        self.stability = stability
        self.logits = logits
        self.distances = distances

    def metrics(self) -> dict:
        """
        Everything except the raw arrays.

        :return: The metrics by name
        """
        data = self.to_dict()
        del data['logits']
        del data['distances']
        return data


class ChurnJob(Job):
    """
    Train both models of a pair and compare them on the holdout set.
    """

    def __init__(self, config: TrainConfig, dataset: BlobSpec, pair: int, base_seed: int, vary: str = 'both'):
        self.config = config
        self.dataset = dataset
        self.pair = int(pair)
        self.base_seed = int(base_seed)
        self.vary = vary

    @property
    def tag(self) -> str:
        """
        The regulariser strength and the pair
        """
        return 'alpha={} pair={}'.format(self.config.reg.alpha, self.pair)

    def run(self) -> PairRun:
        """
        Train and compare.

        :return: The metrics of the pair
        """
        train_set, holdout = self.dataset.splits
        seeds = pair_seeds(self.base_seed, self.pair, self.vary)

        models = []
        for seed_init, seed_shuffle in seeds:
            config = self.config.with_changes(seed_init=seed_init, seed_shuffle=seed_shuffle)
            models.append(train(config, train_set))

        logits = forward(models[0].params, holdout.inputs)
        first = predict_proba(models[0].params, holdout.inputs, self.config.temperature)
        second = predict_proba(models[1].params, holdout.inputs, self.config.temperature)
        pp = PairedPredictions(first, second, holdout.labels)

        bounds = [check_churn_err_bound(pp), check_hellinger_sandwich(pp)]
        distances = l1(first, second)

        return PairRun(
            alpha=self.config.reg.alpha,
            pair=self.pair,
            seeds=[list(model_seeds) for model_seeds in seeds],
            hard_churn=hard_churn(pp),
            soft_churn=soft_churn(pp),
            excess_soft_churn=excess_soft_churn(pp),
            l1_mean=float(np.mean(distances)),
            l1norm_mean=float(np.mean(lp_dist_normalized(first, second, 1.0))),
            l4_mean=float(np.mean(lp_dist(first, second, 4.0))),
            l05norm_mean=float(np.mean(lp_dist_normalized(first, second, 0.5))),
            err1=error_rate(first, holdout.labels),
            err2=error_rate(second, holdout.labels),
            bounds_hold=all(report.holds for report in bounds),
            stability=stability_counts(pp),
            logits=logits,
            distances=np.atleast_1d(distances),
        )


class ChurnReport(Element):
    """
    All pairs trained with one regulariser strength, the failures among them and the shared-edge histograms of the
    logits and the L1 distances.
    """

    def __init__(self, alpha: float, runs: List[PairRun], failures: List[JobOutcome],
                 logit_histogram: Optional[Histogram] = None, distance_histogram: Optional[Histogram] = None):
        self.alpha = float(alpha)
        self.runs = runs
        self.failures = failures
        self.logit_histogram = logit_histogram
        self.distance_histogram = distance_histogram

    def aggregate(self) -> dict:
        """
        Mean and standard deviation of every metric over the successful pairs.

        :return: The summaries by metric name
        """
        summary = {name: summarise([getattr(run, name) for run in self.runs]) for name in CHURN_METRICS}
        summary['pairs'] = len(self.runs)
        summary['failures'] = len(self.failures)
        summary['bounds_hold'] = all(run.bounds_hold for run in self.runs)
        return summary


def _histogram_edges(low: float, high: float, bins: int) -> np.ndarray:
    if high <= low:
        low, high = low - 0.5, high + 0.5
    return np.linspace(low, high, bins + 1)


def churn_experiment(base_config: TrainConfig, alphas: Sequence[float], pair_count: int, dataset: BlobSpec,
                     vary: str = 'both', workers: int = 1, histogram_bins: int = 20,
                     base_seed: Optional[int] = None) -> List[ChurnReport]:
    """
    Train `pair_count` pairs of models for every regulariser strength and compare every pair on the holdout set.
    Pair p uses the same seeds for every strength, so strengths are compared on the same pairs.

    :param base_config: The training configuration, its regulariser kind is used with every alpha
    :param alphas: The regulariser strengths to sweep
    :param pair_count: The number of pairs per strength
    :param dataset: The dataset to train and evaluate on
    :param vary: Which seeds differ within a pair: 'both', 'init', 'shuffle' or 'none'
    :param workers: The number of worker processes
    :param histogram_bins: The number of histogram bins
    :param base_seed: The seed that all model seeds derive from, the init seed of the base configuration by default
    :return: One report per alpha, in sweep order
    """
    if pair_count < 1:
        raise InvalidInputError("Need at least one pair")
    if not alphas:
        raise InvalidInputError("Need at least one alpha")
    if base_config.loss != CLASSIFICATION:
        raise InvalidInputError("Churn experiments train classifiers")
    if vary not in VARY:
        raise InvalidInputError("Vary must be one of {}".format(', '.join(VARY)))
    if base_seed is None:
        base_seed = base_config.seed_init

    jobs = []
    for alpha in alphas:
        config = base_config.with_changes(reg=RegParams(alpha, base_config.reg.kind))
        jobs.extend(ChurnJob(config, dataset, pair, base_seed, vary) for pair in range(pair_count))

    logger.info("Training {} pairs of models for {} values of alpha".format(pair_count, len(alphas)))
    outcomes = run_jobs(jobs, workers)

    # Histogram edges are shared by all strengths so that their counts are comparable
    runs = [outcome.result for outcome in outcomes if not outcome.failed]
    if runs:
        pooled = np.concatenate([run.logits.ravel() for run in runs])
        logit_edges = _histogram_edges(float(pooled.min()), float(pooled.max()), histogram_bins)
    distance_edges = np.linspace(0.0, 2.0, histogram_bins + 1)

    reports = []
    for index, alpha in enumerate(alphas):
        chunk = outcomes[index * pair_count:(index + 1) * pair_count]
        alpha_runs = [outcome.result for outcome in chunk if not outcome.failed]
        failures = [outcome for outcome in chunk if outcome.failed]
        for failure in failures:
            logger.error("Pair {} failed: {}".format(failure.tag, failure.error))

        logit_histogram = distance_histogram = None
        if alpha_runs:
            logits = np.concatenate([run.logits.ravel() for run in alpha_runs])
            distances = np.clip(np.concatenate([run.distances for run in alpha_runs]), 0.0, 2.0)
            logit_histogram = histogram(logits, edges=logit_edges)
            distance_histogram = histogram(distances, edges=distance_edges)

        report = ChurnReport(alpha, alpha_runs, failures, logit_histogram, distance_histogram)
        summary = report.aggregate()
        logger.info("alpha={}: hard churn {}, soft churn {}".format(
            alpha, summary['hard_churn']['mean'], summary['soft_churn']['mean']))
        reports.append(report)

    return reports


class RetrievalRun(Element):
    """
    The holdout retrieval metrics of one trained pair of encoders.
    """

    def __init__(self, loss: str, seed: int, recall_at_1: float, recall_at_5: float, recall_at_10: float,
                 pr_auc: float, envelope_width: float, high_score_fraction: float, final_loss: float,
                 profile: Optional[ScoreProfile] = None):
        self.loss = loss
        self.seed = int(seed)
        self.recall_at_1 = recall_at_1
        self.recall_at_5 = recall_at_5
        self.recall_at_10 = recall_at_10
        self.pr_auc = pr_auc
        self.envelope_width = envelope_width
        self.high_score_fraction = high_score_fraction
        self.final_loss = final_loss
        self.profile = profile

    def metrics(self) -> dict:
        """
        Everything except the score profile.

        :return: The metrics by name
        """
        data = self.to_dict()
        del data['profile']
        return data


def evaluate_retrieval(query_embeddings: np.ndarray, doc_embeddings: np.ndarray, temperature: float,
                       square_temperature: bool = True, profile_queries: int = 32) -> dict:
    """
    Score every holdout query against every holdout document and compute the retrieval metrics. Query i matches
    document i, documents beyond the queries are distractors.

    :param query_embeddings: The embedded queries
    :param doc_embeddings: The embedded documents
    :param temperature: The temperature of the cosine scores
    :param square_temperature: Scale cosines by λ² instead of λ
    :param profile_queries: The number of queries in the score profile
    :return: The metrics by name, and the profile under 'profile'
    """
    scores = cosine_scores(query_embeddings, doc_embeddings, temperature, square_temperature)
    queries, documents = scores.shape

    matches = np.zeros(scores.shape, dtype=bool)
    matches[np.arange(queries), np.arange(queries)] = True

    # Cut-offs beyond the number of documents retrieve everything
    results = {'recall_at_{}'.format(k): recall_at_k(scores, min(k, documents)) for k in RECALL_CUTOFFS}
    results['pr_auc'] = pr_curve(scores, matches).auc

    profile = score_distribution_profile(scores, np.arange(min(profile_queries, queries)))
    results['envelope_width'] = profile.width
    results['high_score_fraction'] = high_score_fraction(
        scores, HIGH_SCORE_COSINE * cosine_scale(temperature, square_temperature))
    results['profile'] = profile
    return results


class RetrievalJob(Job):
    """
    Train a pair of encoders with one loss and one seed and evaluate them on the holdout pairs.
    """

    def __init__(self, config: TrainConfig, dataset: PairedSpec, seed: int, profile_queries: int = 32):
        self.config = config
        self.dataset = dataset
        self.seed = int(seed)
        self.profile_queries = int(profile_queries)

    @property
    def tag(self) -> str:
        """
        The loss and the seed
        """
        return 'loss={} seed={}'.format(self.config.loss, self.seed)

    def run(self) -> RetrievalRun:
        """
        Train and evaluate.

        :return: The metrics of the run
        """
        train_set, holdout = self.dataset.splits
        config = self.config.with_changes(seed_init=derive_seed(self.seed, INIT_STREAM),
                                          seed_shuffle=derive_seed(self.seed, SHUFFLE_STREAM))
        model = train(config, train_set)

        results = evaluate_retrieval(forward(model.params, holdout.queries), forward(model.doc_params, holdout.docs),
                                     config.temperature, config.square_temperature, self.profile_queries)
        return RetrievalRun(loss=config.loss, seed=self.seed, final_loss=model.history[-1].loss, **results)


class RetrievalReport(Element):
    """
    All runs of one retrieval loss and the failures among them.
    """

    def __init__(self, loss: str, runs: List[RetrievalRun], failures: List[JobOutcome]):
        self.loss = loss
        self.runs = runs
        self.failures = failures

    def aggregate(self) -> dict:
        """
        Mean and standard deviation of every metric over the successful runs.

        :return: The summaries by metric name
        """
        summary = {name: summarise([getattr(run, name) for run in self.runs]) for name in RETRIEVAL_METRICS}
        summary['runs'] = len(self.runs)
        summary['failures'] = len(self.failures)
        return summary


def retrieval_experiment(base_config: TrainConfig, losses: Sequence[str], seeds: Sequence[int], dataset: PairedSpec,
                         workers: int = 1, profile_queries: int = 32) -> List[RetrievalReport]:
    """
    Train dual encoders with every loss and every seed on the same data and evaluate them on the holdout pairs.

    :param base_config: The training configuration, its loss is replaced by each loss in turn
    :param losses: The registry names of the losses
    :param seeds: The seeds, every loss is trained once per seed
    :param dataset: The paired dataset
    :param workers: The number of worker processes
    :param profile_queries: The number of queries in every score profile
    :return: One report per loss, in the given order
    """
    if not losses or not seeds:
        raise InvalidInputError("Need at least one loss and one seed")

    jobs = [RetrievalJob(base_config.with_changes(loss=loss), dataset, seed, profile_queries)
            for loss in losses for seed in seeds]

    logger.info("Training {} encoder pairs for {} losses".format(len(jobs), len(losses)))
    outcomes = run_jobs(jobs, workers)

    reports = []
    for index, loss in enumerate(losses):
        chunk = outcomes[index * len(seeds):(index + 1) * len(seeds)]
        failures = [outcome for outcome in chunk if outcome.failed]
        for failure in failures:
            logger.error("Run {} failed: {}".format(failure.tag, failure.error))

        report = RetrievalReport(loss, [outcome.result for outcome in chunk if not outcome.failed], failures)
        logger.info("{}: PR AUC {}".format(loss, report.aggregate()['pr_auc']['mean']))
        reports.append(report)

    return reports
