import gzip
import hashlib
import json
import logging
import zipfile
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import httpx

from app.errors import FetchError
from app.services.graph import Graph, load_edgelist
from app.settings import settings

logger = logging.getLogger(__name__)

CHECKSUM_FILE = "checksums.json"


@dataclass(frozen=True)
class SnapDataset:
    """
    A SNAP download. ``nodes``/``edges`` are the counts SNAP publishes for
    the raw file and are only reference metadata: estimates are always
    scored against the loaded, symmetrized graph's own counts, which can
    differ (as-skitter is also quoted with 1,694,616 nodes after cleaning).
    """

    name: str
    filename: str
    nodes: int
    edges: int
    # member of a zip archive holding the edgelist
    member: Optional[str] = None
    skip_lines: int = 0


DATASETS: dict[str, SnapDataset] = {
    d.name: d
    for d in (
        SnapDataset("as-skitter", "as-skitter.txt.gz", 1_696_415, 11_095_298),
        SnapDataset("email-EuAll", "email-EuAll.txt.gz", 265_214, 420_045),
        SnapDataset("wiki-Talk", "wiki-Talk.txt.gz", 2_394_385, 5_021_410),
        SnapDataset("ego-Twitter", "twitter_combined.txt.gz", 81_306, 1_768_149),
        SnapDataset(
            "twitch-gamers",
            "twitch_gamers.zip",
            168_114,
            6_797_557,
            member="large_twitch_edges.csv",
            skip_lines=1,
        ),
    )
}


def get_dataset(name: str) -> SnapDataset:
    try:
        return DATASETS[name]
    except KeyError:
        raise FetchError(
            f"unknown dataset {name!r}; known: {', '.join(sorted(DATASETS))}"
        ) from None


class SnapClient:
    """
    Downloads SNAP edgelists into a data directory. The sha256 of every
    file is recorded in checksums.json on first download and verified on
    every later fetch.
    """

    def __init__(
        self,
        base_url: str | None = None,
        timeout: float | None = None,
        transport: httpx.AsyncBaseTransport | None = None,
    ):
        self.base_url = (base_url or settings.SNAP_BASE_URL).rstrip("/")
        self.headers = {"User-Agent": "walkscope/0.1"}
        self.timeout = timeout if timeout is not None else settings.FETCH_TIMEOUT_SECONDS
        self.transport = transport

    @staticmethod
    def _read_checksums(dest: Path) -> dict[str, str]:
        path = dest / CHECKSUM_FILE
        if not path.exists():
            return {}
        return json.loads(path.read_text(encoding="utf-8"))

    @staticmethod
    def _write_checksums(dest: Path, checksums: dict[str, str]):
        (dest / CHECKSUM_FILE).write_text(
            json.dumps(checksums, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )

    @staticmethod
    def sha256(path: Path) -> str:
        digest = hashlib.sha256()
        with path.open("rb") as fh:
            for chunk in iter(lambda: fh.read(1 << 20), b""):
                digest.update(chunk)
        return digest.hexdigest()

    def _verify(self, dest: Path, dataset: SnapDataset, target: Path):
        checksums = self._read_checksums(dest)
        actual = self.sha256(target)
        expected = checksums.get(dataset.filename)
        if expected is None:
            checksums[dataset.filename] = actual
            self._write_checksums(dest, checksums)
        elif expected != actual:
            raise FetchError(f"checksum mismatch for {dataset.filename}")

    async def fetch(self, name: str, dest_dir: str | Path, force: bool = False) -> Path:
        dataset = get_dataset(name)
        dest = Path(dest_dir)
        dest.mkdir(parents=True, exist_ok=True)
        target = dest / dataset.filename

        if target.exists() and not force:
            logger.info("Dataset already present", extra={"dataset": name, "path": str(target)})
            self._verify(dest, dataset, target)
            return target

        url = f"{self.base_url}/{dataset.filename}"
        partial = target.with_suffix(target.suffix + ".part")
        logger.info("Downloading dataset", extra={"dataset": name, "url": url})
        try:
            async with httpx.AsyncClient(
                headers=self.headers,
                timeout=self.timeout,
                follow_redirects=True,
                transport=self.transport,
            ) as client:
                async with client.stream("GET", url) as resp:
                    resp.raise_for_status()
                    with partial.open("wb") as fh:
                        async for chunk in resp.aiter_bytes(1 << 20):
                            fh.write(chunk)
        except httpx.HTTPError as exc:
            partial.unlink(missing_ok=True)
            raise FetchError(f"download of {name} failed: {exc}") from exc

        partial.replace(target)
        self._verify(dest, dataset, target)
        logger.info(
            "Dataset downloaded",
            extra={"dataset": name, "bytes": target.stat().st_size},
        )
        return target


def open_dataset(name: str, data_dir: str | Path) -> Graph:
    """Parse a fetched dataset; directed inputs come back symmetrized."""
    dataset = get_dataset(name)
    path = Path(data_dir) / dataset.filename
    if not path.exists():
        raise FetchError(f"{dataset.filename} not found in {data_dir}; run fetch first")
    if dataset.member:
        with zipfile.ZipFile(path) as archive:
            member = next(
                (m for m in archive.namelist() if m.endswith(dataset.member)), None
            )
            if member is None:
                raise FetchError(f"{dataset.member} missing from {dataset.filename}")
            with archive.open(member) as fh:
                g = load_edgelist(fh, skip_lines=dataset.skip_lines)
    else:
        with gzip.open(path, "rb") as fh:
            g = load_edgelist(fh, skip_lines=dataset.skip_lines)

    if (g.node_count, g.edge_count) != (dataset.nodes, dataset.edges):
        logger.info(
            "Loaded counts differ from SNAP's published ones",
            extra={
                "dataset": name,
                "node_count": g.node_count,
                "edge_count": g.edge_count,
                "published_nodes": dataset.nodes,
                "published_edges": dataset.edges,
            },
        )
    return g
