"""Synthetic evaluation-comment generator.

Stands in for a private survey corpus: Spanish-flavored comments drawn
from three polarity word distributions with controllable overlap, planted
latent topics per course, and course scores tied to each course's
realized polarity mix by a configurable correlation coefficient.
Deterministic for a fixed seed.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import (
    Comment,
    CourseRecord,
    EDUCATION_LEVELS,
    write_comments_csv,
    write_courses_csv,
    write_labels_csv,
)
from .seeds import derive_seed

__all__ = [
    "POSITIVE_WORDS",
    "NEUTRAL_WORDS",
    "NEGATIVE_WORDS",
    "SHARED_WORDS",
    "FILLER_WORDS",
    "TOPIC_LEXICONS",
    "polarity_distributions",
    "SynthDataset",
    "generate",
    "write_dataset",
]

POSITIVE_WORDS = (
    "excelente", "claro", "dedicado", "amable", "brillante", "didáctico",
    "paciente", "organizado", "motivador", "justo", "preparado", "dinámico",
    "atento", "puntual", "respetuoso", "agradable", "inspirador",
    "competente", "entusiasta", "genial", "práctico", "recomendable",
    "magnífico", "cercano", "generoso",
)

NEUTRAL_WORDS = (
    "normal", "regular", "promedio", "estándar", "común", "típico",
    "moderado", "aceptable", "intermedio", "corriente", "habitual",
    "convencional", "usual", "mediano", "equilibrado", "neutro", "básico",
    "ordinario", "frecuente", "rutinario",
)

NEGATIVE_WORDS = (
    "pésimo", "confuso", "aburrido", "desorganizado", "grosero",
    "impuntual", "injusto", "arrogante", "distante", "incoherente",
    "tedioso", "deficiente", "mediocre", "caótico", "irrespetuoso",
    "negligente", "soberbio", "monótono", "ineficaz", "desastroso",
    "incomprensible", "desinteresado", "hostil", "descuidado", "lamentable",
)

# words any polarity may use once overlap > 0
SHARED_WORDS = (
    "académico", "formal", "presencial", "virtual", "semestral", "teórico",
    "extenso", "denso", "amplio", "variado", "directo", "serio",
    "particular", "especial", "notable", "visible",
)

# class-independent connective nouns present at every overlap level
FILLER_WORDS = (
    "profesor", "materia", "sesiones", "contenido", "grupo", "aula",
    "programa", "unidad", "trabajo", "periodo",
)

TOPIC_LEXICONS = (
    ("metodología", "didáctica", "enseña", "ejemplos", "ejercicios",
     "dinámicas", "pizarra", "diapositivas", "ritmo", "preparación"),
    ("evaluación", "exámenes", "calificación", "tareas", "rúbrica",
     "retroalimentación", "proyectos", "notas", "parciales", "criterios"),
    ("trato", "respeto", "escucha", "empatía", "disposición", "confianza",
     "diálogo", "apoyo", "cordialidad", "cortesía"),
    ("carga", "horas", "lecturas", "entregas", "plazos", "dificultad",
     "exigencia", "volumen", "tiempos", "calendario"),
    ("plataforma", "materiales", "laboratorio", "recursos", "videos",
     "guías", "software", "equipos", "biblioteca", "herramientas"),
)

_PERIODS = ("2023-1", "2023-2", "2024-1")


def polarity_distributions(overlap: float) -> dict[str, tuple[tuple[str, ...], np.ndarray]]:
    """Word support and probabilities per polarity class.

    Each class draws from its own lexicon with probability 1 - overlap and
    from the shared lexicon with probability overlap; overlap 0 therefore
    makes the three supports disjoint.
    """
    if not 0.0 <= overlap < 1.0:
        raise ValueError("overlap must lie in [0, 1)")
    out = {}
    for polarity, own in (("positive", POSITIVE_WORDS),
                          ("neutral", NEUTRAL_WORDS),
                          ("negative", NEGATIVE_WORDS)):
        if overlap == 0.0:
            words = own
            probs = np.full(len(own), 1.0 / len(own))
        else:
            words = own + SHARED_WORDS
            probs = np.concatenate([
                np.full(len(own), (1.0 - overlap) / len(own)),
                np.full(len(SHARED_WORDS), overlap / len(SHARED_WORDS)),
            ])
        out[polarity] = (words, probs)
    return out


@dataclass(frozen=True)
class SynthDataset:
    comments: list[Comment]
    courses: list[CourseRecord]
    labels: dict[str, str]


def _clamp_score(value: float) -> float:
    # two decimals so in-memory records equal their CSV round-trip
    return round(min(max(value, 1.0), 5.0), 2)


def generate(
    n_comments: int,
    n_courses: int,
    seed: int,
    overlap: float = 0.15,
    correlation: float = 0.9,
    n_topics: int = 5,
    short_fraction: float = 0.05,
) -> SynthDataset:
    """Draw a full synthetic dataset.

    Comments mix polarity words, words from the course's preferred planted
    topics, and fillers. A fraction are deliberately too short to pass the
    quality filter. Course evaluation scores are
    1 + 4 * (correlation * mix + (1 - correlation) * noise) where mix is
    the course's realized (positive - negative) comment share rescaled to
    [0, 1] over its filter-passing comments; correlation 1.0 makes the
    score an exact function of the mix.
    """
    if n_comments < 30:
        raise ValueError("n_comments must be at least 30")
    if n_courses < 1:
        raise ValueError("n_courses must be at least 1")
    if not 1 <= n_topics <= len(TOPIC_LEXICONS):
        raise ValueError(f"n_topics must be in [1, {len(TOPIC_LEXICONS)}]")
    if not 0.0 <= correlation <= 1.0:
        raise ValueError("correlation must lie in [0, 1]")
    rng = np.random.default_rng(derive_seed(seed, "synth"))
    distributions = polarity_distributions(overlap)

    # course skeletons: quality drives the polarity tendency
    quality = rng.uniform(0.0, 1.0, size=n_courses)
    topic_prefs = rng.dirichlet(np.full(n_topics, 0.5), size=n_courses)
    course_meta = []
    for i in range(n_courses):
        q = quality[i]
        p_pos = 0.05 + 0.90 * q
        p_neg = 0.55 * (1.0 - q)
        course_meta.append({
            "subject_code": f"S{i + 1:03d}",
            "period": _PERIODS[i % len(_PERIODS)],
            "label_probs": np.array([p_pos, 1.0 - p_pos - p_neg, p_neg]),
            "topic_prefs": topic_prefs[i],
            "education_level": EDUCATION_LEVELS[
                int(rng.integers(len(EDUCATION_LEVELS)))
            ],
        })

    # round-robin base allocation keeps every course populated
    course_of = [i % n_courses for i in range(n_comments)]

    polarity_names = ("positive", "neutral", "negative")
    comments: list[Comment] = []
    labels: dict[str, str] = {}
    kept_counts = [np.zeros(3, dtype=np.int64) for _ in range(n_courses)]
    for idx in range(n_comments):
        course_idx = course_of[idx]
        meta = course_meta[course_idx]
        label = polarity_names[
            int(rng.choice(3, p=meta["label_probs"]))
        ]
        is_short = rng.uniform() < short_fraction
        if is_short:
            length = int(rng.integers(2, 5))
        else:
            length = int(rng.integers(6, 15))
        n_polar = max(1, int(round(0.4 * length)))
        n_topic = max(1, int(round(0.3 * length))) if not is_short else 0
        n_fill = max(0, length - n_polar - n_topic)

        words, probs = distributions[label]
        drawn = [words[int(j)] for j in rng.choice(len(words), size=n_polar,
                                                   p=probs)]
        if n_topic:
            topics = rng.choice(n_topics, size=n_topic, p=meta["topic_prefs"])
            for t in topics:
                lexicon = TOPIC_LEXICONS[int(t)]
                drawn.append(lexicon[int(rng.integers(len(lexicon)))])
        for j in rng.integers(len(FILLER_WORDS), size=n_fill):
            drawn.append(FILLER_WORDS[int(j)])
        order = rng.permutation(len(drawn))
        body = [drawn[int(j)] for j in order]
        text = " ".join(body)
        text = text[0].upper() + text[1:] + "."
        comment_id = f"c{idx + 1:05d}"
        comments.append(Comment(
            id=comment_id,
            subject_code=meta["subject_code"],
            period=meta["period"],
            text=text,
        ))
        labels[comment_id] = label
        if not is_short:
            kept_counts[course_idx][polarity_names.index(label)] += 1

    courses: list[CourseRecord] = []
    for i, meta in enumerate(course_meta):
        counts = kept_counts[i]
        total = int(counts.sum())
        if total > 0:
            mix = (1.0 + (counts[0] - counts[2]) / total) / 2.0
        else:
            mix = 0.5
        noise = float(rng.uniform())
        evaluation = _clamp_score(
            1.0 + 4.0 * (correlation * mix + (1.0 - correlation) * noise)
        )
        pedagogy = _clamp_score(evaluation + float(rng.uniform(-0.3, 0.3)))
        interpersonal = _clamp_score(evaluation + float(rng.uniform(-0.3, 0.3)))
        n_course_comments = course_of.count(i)
        num_students = n_course_comments + int(rng.integers(0, 50))
        courses.append(CourseRecord(
            subject_code=meta["subject_code"],
            period=meta["period"],
            num_students=num_students,
            score_pedagogy=pedagogy,
            score_evaluation=evaluation,
            score_interpersonal=interpersonal,
            education_level=meta["education_level"],
        ))
    return SynthDataset(comments=comments, courses=courses, labels=labels)


def write_dataset(out_dir, dataset: SynthDataset) -> dict[str, Path]:
    """Write the three corpus CSVs into ``out_dir``; returns their paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "comments": out_dir / "comments.csv",
        "courses": out_dir / "courses.csv",
        "labels": out_dir / "labels.csv",
    }
    write_comments_csv(paths["comments"], dataset.comments)
    write_courses_csv(paths["courses"], dataset.courses)
    write_labels_csv(paths["labels"], dataset.labels)
    return paths
