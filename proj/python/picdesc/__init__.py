"""Picture-description screening pipeline.

Thin Python surface over the C++ core: image-text relevance scoring,
sentence filtering, region proposals, dementia-sensitive sub-image search
and few-shot evaluation.
"""

from ._core import (
    Dataset,
    Sentence,
    SyntheticBackend,
    TranscriptSample,
    __version__,
    accumulate_heatmap,
    few_shot_evaluate,
    fixed_split_evaluate,
    iou,
    load_manifest,
    nms,
    pairwise_separation,
    process_dataset,
    propose_regions,
    run_experiment,
    search_dementia_sensitive,
    segment_sentences,
    softmax,
    tokenize,
    welch_t_test,
)

__all__ = [
    "Dataset",
    "Sentence",
    "SyntheticBackend",
    "TranscriptSample",
    "__version__",
    "accumulate_heatmap",
    "few_shot_evaluate",
    "fixed_split_evaluate",
    "iou",
    "load_manifest",
    "nms",
    "pairwise_separation",
    "process_dataset",
    "propose_regions",
    "run_experiment",
    "search_dementia_sensitive",
    "segment_sentences",
    "softmax",
    "tokenize",
    "welch_t_test",
]
