"""Province names and the six-region stratification.

Source datasets spell provinces inconsistently (``İstanbul``, ``ISTANBUL``,
``istanbul ``), so every key goes through :func:`canonicalize` before use.
"""

import unicodedata

REGIONS = ("central", "east", "marmara", "south", "southeast", "west")

# Seven statistical geographic regions collapsed onto six levels:
# Aegean -> west, Mediterranean -> south, Black Sea split at Samsun
# (Samsun and westwards -> central, Ordu and eastwards -> east).
_REGION_MEMBERS = {
    "marmara": (
        "istanbul", "edirne", "kirklareli", "tekirdag", "canakkale", "kocaeli",
        "yalova", "sakarya", "bilecik", "bursa", "balikesir",
    ),
    "west": (
        "izmir", "manisa", "aydin", "denizli", "mugla", "afyonkarahisar",
        "kutahya", "usak",
    ),
    "south": (
        "antalya", "isparta", "burdur", "adana", "mersin", "hatay", "osmaniye",
        "kahramanmaras",
    ),
    "central": (
        "ankara", "konya", "kayseri", "eskisehir", "sivas", "kirikkale",
        "aksaray", "karaman", "kirsehir", "nigde", "nevsehir", "yozgat",
        "cankiri", "zonguldak", "duzce", "bolu", "karabuk", "bartin",
        "kastamonu", "sinop", "samsun", "corum", "amasya", "tokat",
    ),
    "east": (
        "erzurum", "erzincan", "kars", "ardahan", "igdir", "agri", "van", "mus",
        "bitlis", "bingol", "tunceli", "elazig", "malatya", "hakkari", "ordu",
        "giresun", "trabzon", "rize", "artvin", "gumushane", "bayburt",
    ),
    "southeast": (
        "gaziantep", "sanliurfa", "diyarbakir", "mardin", "batman", "siirt",
        "sirnak", "kilis", "adiyaman",
    ),
}

PROVINCE_REGION = {
    name: region for region, names in _REGION_MEMBERS.items() for name in names
}
PROVINCES = tuple(sorted(PROVINCE_REGION))
N_PROVINCES = 81
assert len(PROVINCES) == N_PROVINCES

ALIASES = {
    "afyon": "afyonkarahisar",
    "icel": "mersin",
    "k.maras": "kahramanmaras",
    "maras": "kahramanmaras",
    "urfa": "sanliurfa",
    "antep": "gaziantep",
}

_FOLD = str.maketrans({
    "ı": "i", "İ": "i", "I": "i",
    "ş": "s", "Ş": "s",
    "ğ": "g", "Ğ": "g",
    "ü": "u", "Ü": "u",
    "ö": "o", "Ö": "o",
    "ç": "c", "Ç": "c",
})


def canonicalize(name: str) -> str:
    """Lowercase, ASCII-fold Turkish letters and trim whitespace.

    Idempotent: ``canonicalize(canonicalize(x)) == canonicalize(x)``.
    Aliases are *not* resolved here; see :func:`resolve`.
    """
    s = name
    # a few compatibility characters decompose into uppercase letters or
    # new combining marks, so repeat until nothing changes
    for _ in range(8):
        t = unicodedata.normalize("NFKD", s.strip().translate(_FOLD).lower())
        t = "".join(ch for ch in t if not unicodedata.combining(ch)).strip()
        if t == s:
            break
        s = t
    return s


def resolve(name: str) -> str:
    """Canonicalize and map known alternate spellings to the official name."""
    s = canonicalize(name)
    return ALIASES.get(s, s)


def region_of(name: str) -> str:
    """Region level of a province; raises ``KeyError`` for unknown names."""
    return PROVINCE_REGION[resolve(name)]


def is_province(name: str) -> bool:
    return resolve(name) in PROVINCE_REGION
