"""stylemirror: learn a speaker's recurring n-grams from a growing corpus and
restyle new sentences with them."""

__version__ = "0.1.0"

from .errors import (  # noqa: F401
    ConfigError,
    DegeneratePatternError,
    EmbeddingError,
    EmptyCorpusError,
    EmptyInputError,
    InvalidSupportError,
    NoPatternsError,
    RemoteProviderError,
    StateFormatError,
    StyleMirrorError,
    ZeroVectorError,
)
from .ingest import (  # noqa: F401
    Sentence,
    StopwordSet,
    default_stopwords,
    is_stopword_only,
    normalize,
    split_sentences,
)
from .miner import (  # noqa: F401
    CorpusLog,
    MinerState,
    mine_batch,
    mine_increment,
    style_ngrams,
)
from .embedding import (  # noqa: F401
    BuiltinEmbedder,
    RemoteEmbedder,
    UnigramTable,
    cosine,
)
from .patterns import (  # noqa: F401
    Context,
    Pattern,
    PatternRecord,
    PatternStore,
    decompose,
    reconstruct,
)
from .transformer import (  # noqa: F401
    GecHook,
    TransformResult,
    transform,
)
from .evaluator import (  # noqa: F401
    NGramLM,
    evaluate,
    perplexity,
    train_lm,
)
from .session import Config, Session  # noqa: F401
