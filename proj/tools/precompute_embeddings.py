#!/usr/bin/env python3
"""Precompute pretrained embeddings into the on-disk vector store.

The C++ pipeline never runs neural networks; `backend=pretrained` reads
vectors that this script wrote. Three kinds of entries are produced:

  text:<canonical sentence>          joint text vectors (CLIP text tower)
  image:<picture_id>:<x0,y0,x1,y1>   joint crop vectors (CLIP image tower),
                                     for the full frame and every proposal box
  token:<token>                      context-free token vectors (BERT input
                                     embeddings); classifier features are token
                                     averages, so storing tokens covers every
                                     filtered variant of a transcript

Typical flow:

  picdesc regions --dataset DATA --save proposals.tsv
  python tools/precompute_embeddings.py --dataset DATA --proposals proposals.tsv \
      --cache CACHE_DIR
  picdesc run --dataset DATA --set backend=pretrained --set cache_dir=CACHE_DIR

Requires torch, transformers and Pillow.
"""

import argparse
import json
import pathlib
import struct
import sys

PICTURE_EXTENSIONS = [".png", ".ppm", ".pgm", ".pbm", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff"]


# --- store format (must match the C++ CacheStore exactly) --------------------

def fnv1a64(data: bytes) -> int:
    h = 0xCBF29CE484222325
    for byte in data:
        h ^= byte
        h = (h * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return h


def hex64(value: int) -> str:
    return format(value, "016x")


class VectorStore:
    def __init__(self, directory: pathlib.Path):
        self.dir = directory
        self.dir.mkdir(parents=True, exist_ok=True)
        self.index_path = self.dir / "index.json"
        self.entries = {}
        if self.index_path.exists():
            self.entries = json.loads(self.index_path.read_text())

    def contains(self, backend_id: str, content_key: str) -> bool:
        return f"{backend_id}|{hex64(fnv1a64(content_key.encode()))}" in self.entries

    def put(self, backend_id: str, content_key: str, values) -> None:
        content = hex64(fnv1a64(content_key.encode()))
        file_name = f"{hex64(fnv1a64(backend_id.encode()))}-{content}.f64"
        (self.dir / file_name).write_bytes(struct.pack(f"<{len(values)}d", *values))
        self.entries[f"{backend_id}|{content}"] = {"file": file_name, "dim": len(values)}

    def flush(self) -> None:
        tmp = self.dir / "index.json.tmp"
        tmp.write_text(json.dumps(self.entries, indent=1, sort_keys=True) + "\n")
        tmp.rename(self.index_path)


# --- corpus conventions (mirrors of the C++ text handling) -------------------

def transcript_sentences(raw_text: str) -> list:
    """Transcripts hold one sentence per line; blank lines are skipped."""
    return [line.strip() for line in raw_text.splitlines() if line.strip()]


def _is_ascii_alnum(char: str) -> bool:
    return ("0" <= char <= "9") or ("a" <= char <= "z") or ("A" <= char <= "Z")


def tokenize(text: str) -> list:
    tokens = []
    for word in text.split():
        begin, end = 0, len(word)
        while begin < end and not _is_ascii_alnum(word[begin]):
            begin += 1
        while end > begin and not _is_ascii_alnum(word[end - 1]):
            end -= 1
        if begin < end:
            tokens.append(word[begin:end].lower())
    return tokens


def canonical_truncated(text: str, max_tokens: int) -> str:
    return " ".join(text.split()[:max_tokens])


# --- dataset loading ----------------------------------------------------------

def load_dataset(dataset_dir: pathlib.Path):
    manifest = dataset_dir / "manifest.tsv"
    samples = []
    for line in manifest.read_text().splitlines():
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        fields = [f.strip() for f in line.split("\t")]
        if fields[0] == "sample_id":  # optional header row
            continue
        sample_id, _label, transcript = fields[0], fields[1], fields[2]
        raw = (dataset_dir / transcript).read_text()
        samples.append({"sample_id": sample_id, "sentences": transcript_sentences(raw)})

    picture = next(
        (dataset_dir / f"picture{ext}" for ext in PICTURE_EXTENSIONS
         if (dataset_dir / f"picture{ext}").exists()),
        None,
    )
    if picture is None:
        sys.exit(f"no picture.* raster in {dataset_dir}")
    return samples, picture


def load_proposals(path: pathlib.Path) -> list:
    boxes = []
    for line in path.read_text().splitlines():
        if not line or line.startswith(("order", "#")):
            continue
        _, x0, y0, x1, y1 = line.split("\t")
        boxes.append((int(x0), int(y0), int(x1), int(y1)))
    return boxes


# --- embedding ------------------------------------------------------------------

def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--dataset", required=True, type=pathlib.Path)
    parser.add_argument("--proposals", required=True, type=pathlib.Path,
                        help="TSV from `picdesc regions --save`")
    parser.add_argument("--cache", required=True, type=pathlib.Path)
    parser.add_argument("--joint-model", default="clip-vit-base-patch32",
                        help="CLIP checkpoint suffix under openai/")
    parser.add_argument("--text-model", default="bert-base-uncased")
    parser.add_argument("--max-text-tokens", type=int, default=77)
    parser.add_argument("--device", default="cpu")
    parser.add_argument("--batch-size", type=int, default=64)
    args = parser.parse_args()

    import torch
    from PIL import Image
    from transformers import AutoModel, AutoTokenizer, CLIPModel, CLIPProcessor

    samples, picture_path = load_dataset(args.dataset)
    proposals = load_proposals(args.proposals)
    store = VectorStore(args.cache)

    # backend ids match BackendDescriptor::backend_id() with dim left at 0
    joint_id = f"joint_pretrained:{args.joint_model}:0"
    text_id = f"text_pretrained:{args.text_model}:0"

    sentences, tokens = [], set()
    for sample in samples:
        for sentence in sample["sentences"]:
            sentences.append(canonical_truncated(sentence, args.max_text_tokens))
            tokens.update(tokenize(sentence))
    sentences = sorted(set(sentences))
    tokens = sorted(tokens)

    image = Image.open(picture_path).convert("RGB")
    picture_id = f"{picture_path.stem}@{image.width}x{image.height}"
    boxes = [(0, 0, image.width, image.height)] + proposals

    print(f"{len(sentences)} sentences, {len(tokens)} tokens, {len(boxes)} crops")

    clip = CLIPModel.from_pretrained(f"openai/{args.joint_model}").to(args.device).eval()
    clip_processor = CLIPProcessor.from_pretrained(f"openai/{args.joint_model}")

    with torch.no_grad():
        pending = [s for s in sentences if not store.contains(joint_id, f"text:{s}")]
        for start in range(0, len(pending), args.batch_size):
            batch = pending[start:start + args.batch_size]
            inputs = clip_processor(text=batch, return_tensors="pt", padding=True,
                                    truncation=True).to(args.device)
            features = clip.get_text_features(**inputs)
            features = features / features.norm(dim=-1, keepdim=True)
            for sentence, vector in zip(batch, features.cpu().double()):
                store.put(joint_id, f"text:{sentence}", vector.tolist())

        pending_boxes = [
            b for b in boxes
            if not store.contains(joint_id, f"image:{picture_id}:{b[0]},{b[1]},{b[2]},{b[3]}")
        ]
        for start in range(0, len(pending_boxes), args.batch_size):
            batch = pending_boxes[start:start + args.batch_size]
            crops = [image.crop(box) for box in batch]
            inputs = clip_processor(images=crops, return_tensors="pt").to(args.device)
            features = clip.get_image_features(**inputs)
            features = features / features.norm(dim=-1, keepdim=True)
            for box, vector in zip(batch, features.cpu().double()):
                key = f"image:{picture_id}:{box[0]},{box[1]},{box[2]},{box[3]}"
                store.put(joint_id, key, vector.tolist())

    del clip, clip_processor

    bert_tokenizer = AutoTokenizer.from_pretrained(args.text_model)
    bert = AutoModel.from_pretrained(args.text_model).to(args.device).eval()
    embedding_matrix = bert.get_input_embeddings().weight

    with torch.no_grad():
        for token in tokens:
            if store.contains(text_id, f"token:{token}"):
                continue
            pieces = bert_tokenizer(token, add_special_tokens=False)["input_ids"]
            if not pieces:
                continue
            vector = embedding_matrix[torch.tensor(pieces, device=args.device)].mean(dim=0)
            store.put(text_id, f"token:{token}", vector.cpu().double().tolist())

    store.flush()
    print(f"{len(store.entries)} vectors in {store.dir}")


if __name__ == "__main__":
    main()
