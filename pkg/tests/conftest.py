# Makes tests/ importable so shared oracles can be reused across modules.
