"""Numba-compiled inner loops for classifier SGD and LDA Gibbs sampling.

Everything here is deterministic for a fixed seed: randomness comes from
an explicit xorshift64* generator threaded through the kernels, so results
do not depend on global RNG state or thread scheduling.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

__all__ = ["train_sgd", "gibbs_fit", "gibbs_fold_in", "rng_state_from_seed"]


@njit(cache=True, inline="always")
def _rng_next(state):
    x = state[0]
    x ^= x >> np.uint64(12)
    x ^= x << np.uint64(25)
    x ^= x >> np.uint64(27)
    state[0] = x
    return x * np.uint64(0x2545F4914F6CDD1D)


@njit(cache=True, inline="always")
def _rng_uniform(state):
    # 53-bit mantissa in [0, 1)
    return float(_rng_next(state) >> np.uint64(11)) * (1.0 / 9007199254740992.0)


def rng_state_from_seed(seed: int) -> np.ndarray:
    """Expand a seed into a nonzero xorshift64* state via splitmix64."""
    z = (int(seed) + 0x9E3779B97F4A7C15) & 0xFFFFFFFFFFFFFFFF
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & 0xFFFFFFFFFFFFFFFF
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & 0xFFFFFFFFFFFFFFFF
    z = z ^ (z >> 31)
    state = np.empty(1, dtype=np.uint64)
    state[0] = z | 1
    return state


@njit(cache=True)
def _mean_loss(unit_ids, offsets, labels, emb, weights, bias, class_weights):
    n_docs = offsets.shape[0] - 1
    dim = emb.shape[1]
    n_classes = weights.shape[0]
    x = np.zeros(dim, dtype=np.float64)
    logits = np.zeros(n_classes, dtype=np.float64)
    total = 0.0
    weight_sum = 0.0
    for doc in range(n_docs):
        start = offsets[doc]
        end = offsets[doc + 1]
        for j in range(dim):
            x[j] = 0.0
        if end > start:
            for u in range(start, end):
                row = unit_ids[u]
                for j in range(dim):
                    x[j] += emb[row, j]
            inv = 1.0 / (end - start)
            for j in range(dim):
                x[j] *= inv
        max_logit = -1e300
        for c in range(n_classes):
            s = float(bias[c])
            for j in range(dim):
                s += float(weights[c, j]) * x[j]
            logits[c] = s
            if s > max_logit:
                max_logit = s
        denom = 0.0
        for c in range(n_classes):
            denom += math.exp(logits[c] - max_logit)
        y = labels[doc]
        log_prob = logits[y] - max_logit - math.log(denom)
        w = float(class_weights[y])
        total += -log_prob * w
        weight_sum += w
    return total / weight_sum if weight_sum > 0.0 else 0.0


@njit(cache=True)
def train_sgd(unit_ids, offsets, labels, emb, weights, bias, lr0, epochs,
              class_weights, state):
    """Per-example SGD on softmax cross-entropy with linear LR decay to 0.

    Mutates ``emb`` (unit embeddings), ``weights`` and ``bias`` in place;
    returns the mean training loss evaluated in a full pass after each
    epoch. Examples are reshuffled every epoch with the provided RNG
    state.
    """
    n_docs = offsets.shape[0] - 1
    dim = emb.shape[1]
    n_classes = weights.shape[0]
    losses = np.zeros(epochs, dtype=np.float64)
    order = np.arange(n_docs, dtype=np.int64)
    x = np.zeros(dim, dtype=np.float64)
    gx = np.zeros(dim, dtype=np.float64)
    logits = np.zeros(n_classes, dtype=np.float64)
    probs = np.zeros(n_classes, dtype=np.float64)
    total_updates = epochs * n_docs
    t = 0
    for epoch in range(epochs):
        for i in range(n_docs - 1, 0, -1):
            j = int(_rng_uniform(state) * (i + 1))
            tmp = order[i]
            order[i] = order[j]
            order[j] = tmp
        for k in range(n_docs):
            doc = order[k]
            lr = lr0 * (1.0 - t / total_updates)
            t += 1
            start = offsets[doc]
            end = offsets[doc + 1]
            count = end - start
            for j in range(dim):
                x[j] = 0.0
            if count > 0:
                for u in range(start, end):
                    row = unit_ids[u]
                    for j in range(dim):
                        x[j] += emb[row, j]
                inv = 1.0 / count
                for j in range(dim):
                    x[j] *= inv
            max_logit = -1e300
            for c in range(n_classes):
                s = float(bias[c])
                for j in range(dim):
                    s += float(weights[c, j]) * x[j]
                logits[c] = s
                if s > max_logit:
                    max_logit = s
            denom = 0.0
            for c in range(n_classes):
                probs[c] = math.exp(logits[c] - max_logit)
                denom += probs[c]
            for c in range(n_classes):
                probs[c] /= denom
            y = labels[doc]
            w_cls = float(class_weights[y])
            # input gradient uses the pre-update output weights
            for j in range(dim):
                gx[j] = 0.0
            for c in range(n_classes):
                g_c = (probs[c] - (1.0 if c == y else 0.0)) * w_cls
                for j in range(dim):
                    gx[j] += float(weights[c, j]) * g_c
            for c in range(n_classes):
                g_c = (probs[c] - (1.0 if c == y else 0.0)) * w_cls
                bias[c] -= lr * g_c
                for j in range(dim):
                    weights[c, j] -= lr * g_c * x[j]
            if count > 0:
                inv = 1.0 / count
                for u in range(start, end):
                    row = unit_ids[u]
                    for j in range(dim):
                        emb[row, j] -= lr * gx[j] * inv
        losses[epoch] = _mean_loss(
            unit_ids, offsets, labels, emb, weights, bias, class_weights
        )
    return losses


@njit(cache=True)
def gibbs_fit(token_ids, doc_ids, n_docs, n_topics, vocab_size, alpha, beta,
              iterations, state, doc_topic, topic_word, topic_totals, assignments,
              log_likelihoods):
    """Collapsed Gibbs sampling for LDA over a flat token stream.

    ``token_ids[i]`` and ``doc_ids[i]`` give word and document of token
    ``i``. Count tables and ``assignments`` are filled in place; the joint
    log-likelihood log P(w, z) is recorded after every sweep.
    """
    n_tokens = token_ids.shape[0]
    probs = np.zeros(n_topics, dtype=np.float64)

    # random initial assignments
    for i in range(n_tokens):
        k = int(_rng_uniform(state) * n_topics)
        if k == n_topics:
            k = n_topics - 1
        assignments[i] = k
        doc_topic[doc_ids[i], k] += 1
        topic_word[k, token_ids[i]] += 1
        topic_totals[k] += 1

    v_beta = vocab_size * beta
    for sweep in range(iterations):
        for i in range(n_tokens):
            w = token_ids[i]
            d = doc_ids[i]
            k_old = assignments[i]
            doc_topic[d, k_old] -= 1
            topic_word[k_old, w] -= 1
            topic_totals[k_old] -= 1
            total = 0.0
            for k in range(n_topics):
                p = (doc_topic[d, k] + alpha) * (topic_word[k, w] + beta) / (
                    topic_totals[k] + v_beta
                )
                probs[k] = p
                total += p
            r = _rng_uniform(state) * total
            acc = 0.0
            k_new = n_topics - 1
            for k in range(n_topics):
                acc += probs[k]
                if r < acc:
                    k_new = k
                    break
            assignments[i] = k_new
            doc_topic[d, k_new] += 1
            topic_word[k_new, w] += 1
            topic_totals[k_new] += 1
        log_likelihoods[sweep] = _joint_log_likelihood(
            doc_topic, topic_word, topic_totals, n_docs, alpha, beta
        )


@njit(cache=True)
def _joint_log_likelihood(doc_topic, topic_word, topic_totals, n_docs, alpha, beta):
    """log P(w, z) with the Dirichlet parameters integrated out."""
    n_topics = topic_word.shape[0]
    vocab_size = topic_word.shape[1]
    ll = n_topics * (math.lgamma(vocab_size * beta) - vocab_size * math.lgamma(beta))
    for k in range(n_topics):
        for w in range(vocab_size):
            ll += math.lgamma(topic_word[k, w] + beta)
        ll -= math.lgamma(topic_totals[k] + vocab_size * beta)
    ll += n_docs * (math.lgamma(n_topics * alpha) - n_topics * math.lgamma(alpha))
    for d in range(n_docs):
        doc_len = 0
        for k in range(n_topics):
            ll += math.lgamma(doc_topic[d, k] + alpha)
            doc_len += doc_topic[d, k]
        ll -= math.lgamma(doc_len + n_topics * alpha)
    return ll


@njit(cache=True)
def gibbs_fold_in(token_ids, n_topics, alpha, beta, vocab_size, topic_word,
                  topic_totals, sweeps, state):
    """Infer topic counts for one unseen document against frozen topic-word
    counts; returns the document's topic-count vector."""
    n_tokens = token_ids.shape[0]
    doc_counts = np.zeros(n_topics, dtype=np.int32)
    assignments = np.zeros(n_tokens, dtype=np.int32)
    probs = np.zeros(n_topics, dtype=np.float64)
    v_beta = vocab_size * beta
    for i in range(n_tokens):
        k = int(_rng_uniform(state) * n_topics)
        if k == n_topics:
            k = n_topics - 1
        assignments[i] = k
        doc_counts[k] += 1
    for _ in range(sweeps):
        for i in range(n_tokens):
            w = token_ids[i]
            k_old = assignments[i]
            doc_counts[k_old] -= 1
            total = 0.0
            for k in range(n_topics):
                p = (doc_counts[k] + alpha) * (topic_word[k, w] + beta) / (
                    topic_totals[k] + v_beta
                )
                probs[k] = p
                total += p
            r = _rng_uniform(state) * total
            acc = 0.0
            k_new = n_topics - 1
            for k in range(n_topics):
                acc += probs[k]
                if r < acc:
                    k_new = k
                    break
            assignments[i] = k_new
            doc_counts[k_new] += 1
    return doc_counts
