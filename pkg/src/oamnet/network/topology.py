"""User directory, mirror table and sorter of the mode-division-multiplexed network."""

from dataclasses import dataclass, field

from oamnet.errors import OrderCapError, UnknownUserError
from oamnet.optics.sorter_optics import (
    DEFAULT_MAX_ABS_ELL,
    SorterLeaf,
    SorterTree,
    build_sorter_tree,
    leaf_paths,
    validate_tree,
)
from oamnet.utils import parse_angle

# Four-user net: addresses and in-port mirror angles (alpha_1, alpha_2)
FOUR_USER_ADDRESSES = {"Alice": 4, "Bob": 2, "Charley": 3, "David": 1}

DEFAULT_MIRROR_TABLE = {
    "Charley": ("1/4 pi", "-1/4 pi"),
    "David": ("1/4 pi", "-1/2 pi"),
    "Bob": ("0", "-1/2 pi"),
    "Alice": ("3/4 pi", "-1/2 pi"),
}


@dataclass(frozen=True)
class User:
    name: str
    ell: int | None
    drop_plates: int = 0

    def __post_init__(self):
        if not self.name:
            raise ValueError("user name must be nonempty")
        if self.drop_plates < 0:
            raise ValueError(f"{self.name}: drop_plates must be nonnegative")

    @property
    def addressable(self) -> bool:
        return self.ell is not None


@dataclass(frozen=True)
class NoiseModel:
    """
    Channel noise applied by transmit, all off by default.

    ell_crosstalk_prob: ell shifts by +1 or -1 (even odds) in transit
    pol_flip_prob: bit flip inside the arrival basis
    loss_prob: photon never detected
    """

    ell_crosstalk_prob: float = 0.0
    pol_flip_prob: float = 0.0
    loss_prob: float = 0.0

    def __post_init__(self):
        for name in ("ell_crosstalk_prob", "pol_flip_prob", "loss_prob"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name}={value} outside [0, 1]")
        if self.ell_crosstalk_prob + self.loss_prob > 1.0:
            raise ValueError("ell_crosstalk_prob + loss_prob must not exceed 1")

    @property
    def silent(self) -> bool:
        return self.ell_crosstalk_prob == 0 and self.pol_flip_prob == 0 and self.loss_prob == 0


@dataclass(frozen=True)
class NetworkConfig:
    users: tuple[User, ...]
    mirror_table: dict[str, tuple[float, float]]
    sorter: SorterTree
    noise: NoiseModel = field(default_factory=NoiseModel)
    max_abs_ell: int = DEFAULT_MAX_ABS_ELL

    def __post_init__(self):
        object.__setattr__(self, "users", tuple(self.users))
        names = [user.name for user in self.users]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate user names in {names}")

        by_ell: dict[int, str] = {}
        for user in self.users:
            if user.ell is None:
                continue
            if user.ell in by_ell:
                raise ValueError(
                    f"duplicate address ell={user.ell} for {by_ell[user.ell]} and {user.name}"
                )
            if abs(user.ell) > self.max_abs_ell:
                raise OrderCapError(f"{user.name} address |ell|", abs(user.ell), self.max_abs_ell)
            by_ell[user.ell] = user.name

        missing = [name for name in names if name not in self.mirror_table]
        if missing:
            raise ValueError(f"mirror table has no angles for {missing}")
        unknown = [name for name in self.mirror_table if name not in names]
        if unknown:
            raise ValueError(f"mirror table names unknown users {unknown}")

        validate_tree(self.sorter, by_ell)

        owners, depths = {}, {}
        for leaf, trail in leaf_paths(self.sorter):
            plates = sum(1 for stage, _ in trail if stage.applies_qwp)
            for ell in leaf.addresses:
                owners[leaf.leaf_id] = by_ell[ell]
                depths[by_ell[ell]] = plates
        for user in self.users:
            if user.name in depths:
                depths[user.name] += user.drop_plates
        object.__setattr__(self, "_leaf_owner", owners)
        object.__setattr__(self, "_depths", depths)

    def user(self, name: str) -> User:
        for user in self.users:
            if user.name == name:
                return user
        raise UnknownUserError(name)

    def addresses(self) -> dict[str, int]:
        return {user.name: user.ell for user in self.users if user.ell is not None}

    def owner_of(self, leaf: SorterLeaf) -> str | None:
        return self._leaf_owner.get(leaf.leaf_id)

    def leaf_depth(self, name: str) -> int:
        """Quarter-wave plates a photon meets on its way to this receiver; public topology."""
        user = self.user(name)
        if not user.addressable:
            raise ValueError(f"{name} has no address and receives nothing")
        return self._depths[name]


def mirror_table_from_text(table: dict[str, tuple[str, str]]) -> dict[str, tuple[float, float]]:
    return {name: (parse_angle(a1), parse_angle(a2)) for name, (a1, a2) in table.items()}


def build_network(
    users,
    mirror_table: dict[str, tuple[float, float]],
    noise: NoiseModel | None = None,
    max_abs_ell: int = DEFAULT_MAX_ABS_ELL,
    use_qwp: bool = True,
) -> NetworkConfig:
    """Synthesize the sorter over the users' addresses and assemble the config."""
    users = tuple(users)
    addresses = [user.ell for user in users if user.ell is not None]
    sorter = build_sorter_tree(addresses, use_qwp=use_qwp, max_abs_ell=max_abs_ell)
    return NetworkConfig(users, dict(mirror_table), sorter, noise or NoiseModel(), max_abs_ell)


def four_user_network(noise: NoiseModel | None = None, use_qwp: bool = True) -> NetworkConfig:
    """Any-to-any net: Alice 4, Bob 2, Charley 3, David 1."""
    users = [User(name, ell) for name, ell in FOUR_USER_ADDRESSES.items()]
    return build_network(
        users, mirror_table_from_text(DEFAULT_MIRROR_TABLE), noise=noise, use_qwp=use_qwp
    )


def one_to_any_network(noise: NoiseModel | None = None) -> NetworkConfig:
    """Single transmitter: Alice sends only, Bob 2, Charley 3 and David 1 receive."""
    users = [User("Alice", None)] + [
        User(name, ell) for name, ell in FOUR_USER_ADDRESSES.items() if name != "Alice"
    ]
    return build_network(users, mirror_table_from_text(DEFAULT_MIRROR_TABLE), noise=noise)


def synthetic_link(depth: int, noise: NoiseModel | None = None) -> NetworkConfig:
    """
    Two-user link whose receiver sits behind exactly `depth` quarter-wave plates.

    The sorter carries no prisms; the plates all sit in Bob's drop port.
    """
    users = [User("Alice", 1), User("Bob", 2, drop_plates=depth)]
    table = {"Alice": (0.0, 0.0), "Bob": (0.0, 0.0)}
    return build_network(users, table, noise=noise, use_qwp=False)


def encode_address(destination: str, config: NetworkConfig) -> int:
    user = config.user(destination)
    if user.ell is None:
        raise ValueError(f"{destination} has no address")
    return user.ell


def mirror_angles(sender: str, config: NetworkConfig) -> tuple[float, float]:
    if sender not in config.mirror_table:
        raise UnknownUserError(sender)
    return config.mirror_table[sender]
