# transcript store
