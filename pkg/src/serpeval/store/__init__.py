from .filestore import AppendLog, FileStore, IntegrityError, StoreError

__all__ = ["AppendLog", "FileStore", "IntegrityError", "StoreError"]
