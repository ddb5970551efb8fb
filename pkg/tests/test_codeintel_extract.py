from __future__ import annotations

import json
from pathlib import Path

import pytest

from solverkit.codeintel import (
    CodeExtractor,
    ExtractionCache,
    UrlFetcher,
    retrieve_extracted_code,
)
from solverkit.errors import EmptyCacheError, FetchFailureError, PreconditionError
from solverkit.models import embedder

from conftest import write_web_fixtures


@pytest.fixture
def extractor(tmp_path):
    cache = ExtractionCache(tmp_path / "cache.db")
    return CodeExtractor(
        cache,
        fetcher=UrlFetcher(),
        embed=lambda texts: [embedder.hash_embed(t) for t in texts],
        crawl_delay_s=0.0,
        honor_robots=False,
    )


@pytest.fixture
def urls(tmp_path):
    return write_web_fixtures(tmp_path)


def test_notebook_cells_in_order(extractor, urls, tmp_path):
    report = extractor.extract(urls["tutorial.ipynb"])
    # oracle: count code cells straight from the fixture file
    nb = json.loads((tmp_path / "web" / "tutorial.ipynb").read_text())
    expected = sum(1 for c in nb["cells"] if c["cell_type"] == "code")
    assert len(report.blocks) == expected == 5
    assert [b.ordinal for b in report.blocks] == [0, 1, 2, 3, 4]
    assert all(b.content_kind == "notebook-cell" for b in report.blocks)
    assert report.blocks[0].code == "import numpy as np\n"
    assert "Setup paragraph." in report.blocks[0].context_before
    assert "Now plot it." in report.blocks[1].context_after


def test_docs_page_blocks_with_context(extractor, urls):
    report = extractor.extract(urls["docs.html"])
    assert len(report.blocks) == 2
    assert all(b.content_kind == "docs-block" for b in report.blocks)
    assert "import fixturepkg" in report.blocks[0].code
    assert "First import the library." in report.blocks[0].context_before
    assert "Then compute the volume." in report.blocks[0].context_after


def test_markdown_fences_and_command_examples(extractor, urls):
    report = extractor.extract(urls["guide.md"])
    kinds = [b.content_kind for b in report.blocks]
    assert kinds == ["command-example", "markdown-fence"]
    assert report.blocks[0].code == "pip install fixturepkg\n"
    assert "Install the package first." in report.blocks[0].context_before


def test_raw_file_single_verbatim_block(extractor, urls, tmp_path):
    report = extractor.extract(urls["snippet.py"])
    assert len(report.blocks) == 1
    block = report.blocks[0]
    assert block.content_kind == "raw-file"
    assert block.code == (tmp_path / "web" / "snippet.py").read_text()


def test_page_with_no_code_is_ok_zero_blocks(extractor, urls):
    report = extractor.extract(urls["empty.html"])
    assert report.blocks == []
    assert report.pages_visited == 1


def test_extraction_deterministic_across_runs(tmp_path):
    urls = write_web_fixtures(tmp_path)

    def run(cache_name: str):
        cache = ExtractionCache(tmp_path / cache_name)
        ex = CodeExtractor(cache, embed=None, crawl_delay_s=0.0)
        report = ex.extract(urls["tutorial.ipynb"])
        return [(b.ordinal, b.code, b.context_before, b.context_after)
                for b in report.blocks]

    assert run("c1.db") == run("c2.db")


def test_cache_hit_zero_fetches(extractor, urls):
    first = extractor.extract(urls["docs.html"])
    assert not first.cache_hit and first.fetch_count == 1
    count_before = extractor.fetcher.fetch_count
    second = extractor.extract(urls["docs.html"])
    assert second.cache_hit
    assert second.fetch_count == 0
    assert extractor.fetcher.fetch_count == count_before  # no network at all
    assert [b.code for b in second.blocks] == [b.code for b in first.blocks]


def test_cache_keyed_by_strategy(extractor, urls):
    extractor.extract(urls["docs.html"], strategy="single-page")
    report = extractor.extract(urls["docs.html"], strategy="smart-crawl")
    assert not report.cache_hit  # distinct key


def test_smart_crawl_follows_same_host_links(extractor, urls):
    report = extractor.extract(urls["index.html"], strategy="smart-crawl",
                               max_pages=10)
    assert report.pages_visited == 3  # index + page1 + page2, offsite skipped
    codes = [b.code for b in report.blocks]
    assert any("index" in c for c in codes)
    assert any("page1" in c for c in codes)


def test_smart_crawl_respects_max_pages(extractor, urls):
    report = extractor.extract(urls["index.html"], strategy="smart-crawl",
                               max_pages=1)
    assert report.pages_visited == 1


def test_fetch_failure_on_missing_url(extractor, tmp_path):
    with pytest.raises(FetchFailureError):
        extractor.extract((tmp_path / "web" / "missing.html").as_uri())


def test_bad_strategy_and_pages_rejected(extractor, urls):
    with pytest.raises(PreconditionError):
        extractor.extract(urls["docs.html"], strategy="wild")
    with pytest.raises(PreconditionError):
        extractor.extract(urls["docs.html"], max_pages=0)
    with pytest.raises(PreconditionError):
        extractor.extract("not-a-url")


# -- retrieval --------------------------------------------------------------------


def test_query_identical_to_block_ranks_first(extractor, urls):
    extractor.extract(urls["tutorial.ipynb"])
    extractor.extract(urls["guide.md"])
    target = "print(x.sum())\n"
    hits = retrieve_extracted_code(extractor.cache, target, 3,
                                   embed=extractor.embed)
    assert hits[0][0].code == target
    assert hits[0][1] == pytest.approx(1.0)


def test_match_count_clamps_to_store(extractor, urls):
    extractor.extract(urls["docs.html"])
    hits = retrieve_extracted_code(extractor.cache, "volume", 50,
                                   embed=extractor.embed)
    assert len(hits) == 2


def test_empty_cache_errors(extractor):
    with pytest.raises(EmptyCacheError):
        retrieve_extracted_code(extractor.cache, "anything", 1)


def test_retrieval_ranking_matches_bruteforce_oracle(extractor, urls):
    extractor.extract(urls["tutorial.ipynb"])
    extractor.extract(urls["guide.md"])
    extractor.extract(urls["docs.html"])
    query = "import the structure library"
    hits = retrieve_extracted_code(extractor.cache, query, 100,
                                   embed=extractor.embed)

    # independent oracle: brute-force cosine over all cached blocks
    import numpy as np

    def oracle_cosine(a, b):
        na = sum(x * x for x in a) ** 0.5
        nb = sum(x * x for x in b) ** 0.5
        if na == 0 or nb == 0:
            return 0.0
        return float(sum(x * y for x, y in zip(a, b)) / (na * nb))

    qv = embedder.hash_embed(query)
    blocks = extractor.cache.all_blocks()
    expected = sorted(
        ((b, oracle_cosine(qv.tolist(), b.embedding)) for b in blocks),
        key=lambda item: (-item[1], item[0].source_url, item[0].ordinal),
    )
    assert [(b.source_url, b.ordinal) for b, _ in hits] == \
        [(b.source_url, b.ordinal) for b, _ in expected]
    for (_, got), (_, want) in zip(hits, expected):
        assert got == pytest.approx(want, abs=1e-12)


def test_cache_soundness_byte_identical_blocks(extractor, urls):
    first = extractor.extract(urls["guide.md"])
    second = extractor.extract(urls["guide.md"])
    assert second.cache_hit
    for a, b in zip(first.blocks, second.blocks):
        assert a.code.encode() == b.code.encode()
        assert a.context_before == b.context_before
        assert a.context_after == b.context_after
