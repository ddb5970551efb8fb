from .backend import FixtureSearchBackend, SearchBackend, SearchHit, search_tool

__all__ = ["FixtureSearchBackend", "SearchBackend", "SearchHit", "search_tool"]
