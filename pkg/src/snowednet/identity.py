"""Three-tier anonymous identity: RealID -> BCADD -> APPID.

Every identifier is a Pedersen commitment ``C = g^x * h^blind`` to the
user's RealID secret ``x``.  An authority endorses ``C`` with a Schnorr
signature after the user privately proves that ``C`` hides the same ``x`` as
the registered RealID key, and the user attaches a Fiat-Shamir proof of
knowledge of the opening.  Anyone can then check the address, the
endorsement and the proof; only the endorsing authority can map an address
back to a person.

Groups are the order-q subgroup of Z_p* for a safe prime ``p = 2q + 1``.
``h`` comes from hashing into the group, so nobody knows ``log_g h``.
"""

from __future__ import annotations

import base64
import hashlib
import json
import random
import re
import secrets
import struct
from dataclasses import asdict, dataclass, field, replace
from enum import Enum
from functools import lru_cache

import sympy

from .ledger import digest

# RFC 3526 group 14 (2048-bit MODP safe prime)
MODP_2048 = int(
    "FFFFFFFFFFFFFFFFC90FDAA22168C234C4C6628B80DC1CD129024E088A67CC74020BBEA63B139B22514A08798E3404DD"
    "EF9519B3CD3A431B302B0A6DF25F14374FE1356D6D51C245E485B576625E7EC6F44C42E9A637ED6B0BFF5CB6F406B7ED"
    "EE386BFB5A899FA5AE9F24117C4B1FE649286651ECE45B3DC2007CB8A163BF0598DA48361C55D39A69163FA8FD24CF5F"
    "83655D23DCA3AD961C62F356208552BB9ED529077096966D670C354E4ABC9804F1746C08CA18217C32905E462E36CE3B"
    "E39E772C180E86039B2783A2EC07A28FB5C55DF06F4C52C9DE2BCBF6955817183995497CEA956AE515D2261898FA0510"
    "15728E5A8AACAA68FFFFFFFFFFFFFFFF",
    16,
)
DEFAULT_CONTEXT = b"snowednet/identity/v1"


class IdentityError(ValueError):
    pass


class Refusal(IdentityError):
    """Authority declined a registration or parameter request."""


class UnknownAddress(LookupError):
    pass


# -- group setup ----------------------------------------------------------


@dataclass(frozen=True)
class GroupParams:
    p: int
    q: int
    g: int
    h: int
    context: bytes = DEFAULT_CONTEXT

    @property
    def element_size(self) -> int:
        return (self.p.bit_length() + 7) // 8

    def enc(self, x: int) -> bytes:
        return x.to_bytes(self.element_size, "big")

    def is_element(self, x: int) -> bool:
        """Membership in the order-q subgroup (the identity included)."""
        return 0 < x < self.p and pow(x, self.q, self.p) == 1

    def validate(self) -> "GroupParams":
        p, q = self.p, self.q
        if p != 2 * q + 1:
            raise IdentityError("p must equal 2q + 1")
        if not (sympy.isprime(q) and sympy.isprime(p)):
            raise IdentityError("p and q must be prime")
        for name, x in (("g", self.g), ("h", self.h)):
            if x == 1 or not self.is_element(x):
                raise IdentityError(f"{name} does not have order q")
        if self.g == self.h:
            raise IdentityError("g and h must differ")
        return self

    def to_dict(self) -> dict:
        return {"p": hex(self.p), "q": hex(self.q), "g": hex(self.g), "h": hex(self.h), "context": self.context.decode()}


def _expand(material: bytes, nbytes: int) -> int:
    return int.from_bytes(hashlib.shake_256(material).digest(nbytes), "big")


def hash_to_group(p: int, material: bytes) -> int:
    """Square a hash output mod p: lands in the order-q subgroup, dlog unknown."""
    size = (p.bit_length() + 7) // 8 + 16
    for ctr in range(1000):
        x = _expand(material + struct.pack(">I", ctr), size) % p
        h = x * x % p
        if h not in (0, 1):
            return h
    raise IdentityError("hash_to_group failed")


@lru_cache(maxsize=8)
def _desk_prime(bits: int, seed: int) -> tuple[int, int]:
    for ctr in range(10**6):
        q = _expand(f"snowednet-safe-prime:{bits}:{seed}:{ctr}".encode(), (bits + 7) // 8)
        q = (q % (1 << (bits - 1))) | (1 << (bits - 1)) | 1
        if sympy.isprime(q) and sympy.isprime(2 * q + 1):
            return 2 * q + 1, q
    raise IdentityError("no safe prime found")


def setup(
    level: str = "full",
    *,
    seed: int = 0,
    context: bytes = DEFAULT_CONTEXT,
    p: int | None = None,
    q: int | None = None,
    g: int | None = None,
    h: int | None = None,
) -> GroupParams:
    """Public parameters for the NIZK system.

    ``level`` is ``"toy"`` (p=23, for hand-checkable vectors), ``"desk"``
    (256-bit q, derived from ``seed``) or ``"full"`` (2048-bit RFC 3526
    group).  Explicit ``p, q, g, h`` override the level and are validated.
    """
    if p is not None:
        if q is None or g is None:
            raise IdentityError("explicit parameters need p, q and g")
        h = hash_to_group(p, context + seed.to_bytes(8, "big")) if h is None else h
        return GroupParams(p, q, g, h, context).validate()
    if level == "toy":
        return GroupParams(23, 11, 2, 3, context).validate()
    if level == "desk":
        p, q = _desk_prime(256, seed)
    elif level == "full":
        p, q = MODP_2048, (MODP_2048 - 1) // 2
    else:
        raise IdentityError(f"unknown security level {level!r}")
    h = hash_to_group(p, context + b"/h/" + seed.to_bytes(8, "big"))
    return GroupParams(p, q, 4, h, context).validate()


# -- hashing helpers ------------------------------------------------------


def _frame(*parts: bytes) -> bytes:
    return b"".join(struct.pack(">I", len(x)) + x for x in parts)


def challenge(params: GroupParams, tag: str, *parts: bytes) -> int:
    """Fiat-Shamir challenge over length-prefixed ``context | tag | parts`` mod q."""
    material = _frame(params.context, tag.encode(), *parts)
    return _expand(material, (params.q.bit_length() + 7) // 8 + 16) % params.q


def _scalar(params: GroupParams, rng: random.Random | None) -> int:
    if rng is None:
        return secrets.randbelow(params.q - 1) + 1
    return rng.randrange(1, params.q)


def addr_hash(params: GroupParams, commitment: int) -> str:
    """Address: ledger digest of the commitment, 20 bytes, lowercase base32."""
    raw = digest(params.enc(commitment))[:20]
    return base64.b32encode(raw).decode().lower()


def commit(params: GroupParams, x: int, blind: int) -> int:
    return pow(params.g, x, params.p) * pow(params.h, blind, params.p) % params.p


# -- signatures -----------------------------------------------------------


@dataclass(frozen=True)
class Signature:
    c: int
    s: int

    def to_dict(self) -> dict:
        return {"c": hex(self.c), "s": hex(self.s)}


@dataclass(frozen=True)
class KeyPair:
    secret: int = field(repr=False)
    public: int


def keygen(params: GroupParams, rng: random.Random | None = None) -> KeyPair:
    x = _scalar(params, rng)
    return KeyPair(x, pow(params.g, x, params.p))


def sign(params: GroupParams, key: KeyPair, message: bytes, rng: random.Random | None = None) -> Signature:
    k = _scalar(params, rng)
    r = pow(params.g, k, params.p)
    c = challenge(params, "sig", params.enc(key.public), params.enc(r), message)
    return Signature(c, (k - c * key.secret) % params.q)


def verify_signature(params: GroupParams, public: int, message: bytes, sig: Signature) -> bool:
    if not params.is_element(public) or not (0 <= sig.c < params.q and 0 <= sig.s < params.q):
        return False
    r = pow(params.g, sig.s, params.p) * pow(public, sig.c, params.p) % params.p
    return sig.c == challenge(params, "sig", params.enc(public), params.enc(r), message)


# -- proofs -----------------------------------------------------------------


@dataclass(frozen=True)
class OpeningProof:
    """Proof of knowledge of ``(x, blind)`` with ``C = g^x h^blind``."""

    c: int
    z1: int
    z2: int

    def to_dict(self) -> dict:
        return {"c": hex(self.c), "z1": hex(self.z1), "z2": hex(self.z2)}


def _opening_statement(params: GroupParams, commitment: int, statement: bytes, announcement: int) -> int:
    return challenge(params, "open", params.enc(commitment), statement, params.enc(announcement))


def prove_opening(
    params: GroupParams,
    commitment: int,
    x: int,
    blind: int,
    statement: bytes,
    rng: random.Random | None = None,
    nonces: tuple[int, int] | None = None,
) -> OpeningProof:
    k1, k2 = nonces if nonces is not None else (_scalar(params, rng), _scalar(params, rng))
    a = commit(params, k1, k2)
    c = _opening_statement(params, commitment, statement, a)
    return OpeningProof(c, (k1 - c * x) % params.q, (k2 - c * blind) % params.q)


def verify_opening(params: GroupParams, commitment: int, statement: bytes, proof: OpeningProof) -> bool:
    if not params.is_element(commitment):
        return False
    if not all(0 <= v < params.q for v in (proof.c, proof.z1, proof.z2)):
        return False
    a = commit(params, proof.z1, proof.z2) * pow(commitment, proof.c, params.p) % params.p
    return proof.c == _opening_statement(params, commitment, statement, a)


@dataclass(frozen=True)
class OpeningTranscript:
    """Interactive form ``(announcement, challenge, responses)``."""

    announcement: int
    c: int
    z1: int
    z2: int


def check_opening_transcript(params: GroupParams, commitment: int, tr: OpeningTranscript) -> bool:
    """Sigma-protocol verification equation ``A == g^z1 h^z2 C^c``."""
    lhs = commit(params, tr.z1, tr.z2) * pow(commitment, tr.c, params.p) % params.p
    return tr.announcement == lhs


def simulate_opening(params: GroupParams, commitment: int, c: int, rng: random.Random | None = None) -> OpeningTranscript:
    """Honest-verifier simulator: a verifying transcript from ``(C, c)`` alone."""
    z1, z2 = _scalar(params, rng), _scalar(params, rng)
    a = commit(params, z1, z2) * pow(commitment, c, params.p) % params.p
    return OpeningTranscript(a, c % params.q, z1, z2)


@dataclass(frozen=True)
class EqualityProof:
    """Same ``x`` behind ``C_R = g^x`` and ``C = g^x h^blind``."""

    c: int
    zx: int
    zr: int


def _equality_challenge(params, realid_public, commitment, purpose, a1, a2) -> int:
    return challenge(
        params, "eq", params.enc(realid_public), params.enc(commitment), purpose.encode(), params.enc(a1), params.enc(a2)
    )


def prove_equality(params, realid_public, commitment, x, blind, purpose, rng=None) -> EqualityProof:
    k1, k2 = _scalar(params, rng), _scalar(params, rng)
    a1 = pow(params.g, k1, params.p)
    a2 = commit(params, k1, k2)
    c = _equality_challenge(params, realid_public, commitment, purpose, a1, a2)
    return EqualityProof(c, (k1 - c * x) % params.q, (k2 - c * blind) % params.q)


def verify_equality(params, realid_public, commitment, purpose, proof: EqualityProof) -> bool:
    if not (params.is_element(realid_public) and params.is_element(commitment)):
        return False
    if not all(0 <= v < params.q for v in (proof.c, proof.zx, proof.zr)):
        return False
    p = params.p
    a1 = pow(params.g, proof.zx, p) * pow(realid_public, proof.c, p) % p
    a2 = commit(params, proof.zx, proof.zr) * pow(commitment, proof.c, p) % p
    return proof.c == _equality_challenge(params, realid_public, commitment, purpose, a1, a2)


def prove_dlog(params, public, x, tag: bytes, rng=None) -> tuple[int, int]:
    k = _scalar(params, rng)
    c = challenge(params, "dlog", params.enc(public), tag, params.enc(pow(params.g, k, params.p)))
    return c, (k - c * x) % params.q


def verify_dlog(params, public, tag: bytes, proof: tuple[int, int]) -> bool:
    c, z = proof
    if not params.is_element(public) or not (0 <= c < params.q and 0 <= z < params.q):
        return False
    a = pow(params.g, z, params.p) * pow(public, c, params.p) % params.p
    return c == challenge(params, "dlog", params.enc(public), tag, params.enc(a))


# -- parties ---------------------------------------------------------------


@dataclass(frozen=True)
class RealID:
    secret: int = field(repr=False)
    public: int
    authority_id: str

    @classmethod
    def create(cls, params: GroupParams, authority_id: str, rng=None) -> "RealID":
        x = _scalar(params, rng)
        return cls(x, pow(params.g, x, params.p), authority_id)

    def to_public_dict(self) -> dict:
        return {"public": hex(self.public), "authority_id": self.authority_id}


@dataclass(frozen=True)
class RegistrationReceipt:
    realid_public: int
    signature: Signature

    def message(self, params: GroupParams) -> bytes:
        return b"register" + params.enc(self.realid_public)


@dataclass
class _RegistryEntry:
    real_world_id: str
    attributes: dict


@dataclass
class _Endorsement:
    realid_public: int
    para: bytes
    purpose: str


class Authority:
    """Registers RealIDs and endorses commitments; keeps private audit logs."""

    def __init__(self, name: str, params: GroupParams, rng: random.Random | None = None):
        self.name = name
        self.params = params
        self.key = keygen(params, rng)
        self._rng = rng
        self._registry: dict[int, _RegistryEntry] = {}
        self._endorsements: dict[int, _Endorsement] = {}
        self._by_address: dict[str, int] = {}
        self._serial = 0

    @property
    def public_key(self) -> int:
        return self.key.public

    def public_registry(self) -> dict:
        """What the public learns from the registry: nothing."""
        return {}

    def sign(self, message: bytes) -> Signature:
        return sign(self.params, self.key, message, self._rng)


def register_realid(
    user: RealID,
    authority: Authority,
    real_world_id: str,
    attributes: dict | None = None,
    rng: random.Random | None = None,
) -> RegistrationReceipt:
    """Workflow step 1: bind ``C_R`` to a real-world identity at the authority."""
    params = authority.params
    pok = prove_dlog(params, user.public, user.secret, real_world_id.encode(), rng)
    if user.public in authority._registry:
        raise Refusal("RealID already registered")
    if not verify_dlog(params, user.public, real_world_id.encode(), pok):
        raise Refusal("RealID proof of possession failed")
    authority._registry[user.public] = _RegistryEntry(real_world_id, dict(attributes or {}))
    receipt = RegistrationReceipt(user.public, Signature(0, 0))
    return replace(receipt, signature=authority.sign(receipt.message(params)))


def verify_receipt(params: GroupParams, authority_public: int, receipt: RegistrationReceipt) -> bool:
    return verify_signature(params, authority_public, receipt.message(params), receipt.signature)


@dataclass(frozen=True)
class ParamRequest:
    realid_public: int
    commitment: int
    purpose: str
    proof: EqualityProof
    attribute: str | None = None


def request_param(params, user: RealID, blind: int, purpose: str, attribute=None, rng=None) -> ParamRequest:
    c = commit(params, user.secret, blind)
    proof = prove_equality(params, user.public, c, user.secret, blind, purpose, rng)
    return ParamRequest(user.public, c, purpose, proof, attribute)


_ATTRIBUTE = re.compile(r"([a-z_]+)(>=|<=|==)(-?\d+)")


def _vouch(attribute: str, attributes: dict) -> bool:
    m = _ATTRIBUTE.fullmatch(attribute)
    if m is None:
        raise Refusal(f"unsupported attribute request {attribute!r}")
    name, op, bound = m.group(1), m.group(2), int(m.group(3))
    if name not in attributes:
        raise Refusal(f"authority holds no {name!r} for this RealID")
    value = int(attributes[name])
    return {">=": value >= bound, "<=": value <= bound, "==": value == bound}[op]


def endorsement_message(params: GroupParams, commitment: int, para: bytes, purpose: str) -> bytes:
    return _frame(params.enc(commitment), para, purpose.encode())


def issue_param(authority: Authority, request: ParamRequest) -> tuple[bytes, Signature]:
    """Workflow steps 2 and 7: para with its auxiliary endorsement signature."""
    params = authority.params
    entry = authority._registry.get(request.realid_public)
    if entry is None:
        raise Refusal("RealID not registered")
    if not verify_equality(params, request.realid_public, request.commitment, request.purpose, request.proof):
        raise Refusal("commitment does not hide the registered RealID")
    vouched = {}
    if request.attribute is not None:
        if not _vouch(request.attribute, entry.attributes):
            raise Refusal(f"attribute {request.attribute!r} not satisfied")
        vouched[request.attribute] = True
    authority._serial += 1
    para = json.dumps(
        {"authority": authority.name, "purpose": request.purpose, "vouched": vouched, "serial": authority._serial},
        sort_keys=True,
        separators=(",", ":"),
    ).encode()
    sig = authority.sign(endorsement_message(params, request.commitment, para, request.purpose))
    authority._endorsements[request.commitment] = _Endorsement(request.realid_public, para, request.purpose)
    authority._by_address[addr_hash(params, request.commitment)] = request.commitment
    return para, sig


# -- bundles ---------------------------------------------------------------


class Verdict(Enum):
    ACCEPT = "accept"
    BAD_ADDRESS = "bad_address"
    BAD_SIGNATURE = "bad_signature"
    BAD_PROOF = "bad_proof"

    def __bool__(self):
        return self is Verdict.ACCEPT


@dataclass(frozen=True)
class IdentityBundle:
    kind: str  # "BCADD" or "APPID"
    commitment: int
    address: str
    para: bytes
    purpose: str
    signature: Signature
    proof: OpeningProof
    app_para: bytes | None = None

    def statement(self) -> bytes:
        return proof_statement(self.kind, self.para, self.purpose, self.app_para)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "address": self.address,
            "commitment": hex(self.commitment),
            "para": self.para.decode(),
            "purpose": self.purpose,
            "aux": {"signature": self.signature.to_dict(), "proof": self.proof.to_dict()},
            "app_para": None if self.app_para is None else self.app_para.decode(),
        }


def proof_statement(kind: str, para: bytes, purpose: str, app_para: bytes | None) -> bytes:
    return _frame(kind.encode(), para, purpose.encode(), b"" if app_para is None else b"\x01" + app_para)


def derive_address(
    params: GroupParams,
    x: int,
    blind: int,
    para: bytes,
    aux_sig: Signature,
    purpose: str,
    authority_public: int,
    *,
    kind: str = "BCADD",
    app_para: bytes | None = None,
    rng: random.Random | None = None,
    nonces: tuple[int, int] | None = None,
) -> IdentityBundle:
    """Workflow steps 3-4 (BCADD) and 8-9 (APPID, with ``app_para``)."""
    if kind not in ("BCADD", "APPID"):
        raise IdentityError(f"unknown identifier kind {kind!r}")
    if kind == "APPID" and app_para is None:
        raise IdentityError("APPID derivation needs para_app")
    c = commit(params, x, blind)
    if aux_sig is None or not verify_signature(params, authority_public, endorsement_message(params, c, para, purpose), aux_sig):
        raise IdentityError("para carries no valid authority signature for this commitment")
    statement = proof_statement(kind, para, purpose, app_para)
    proof = prove_opening(params, c, x, blind, statement, rng, nonces)
    return IdentityBundle(kind, c, addr_hash(params, c), para, purpose, aux_sig, proof, app_para)


def verify_bundle(bundle: IdentityBundle, authority_public: int, params: GroupParams) -> Verdict:
    """Public check of an identifier and its auxiliary value (steps 5 and 10)."""
    if bundle.kind not in ("BCADD", "APPID") or (bundle.kind == "APPID") != (bundle.app_para is not None):
        return Verdict.BAD_PROOF
    if not params.is_element(bundle.commitment) or bundle.address != addr_hash(params, bundle.commitment):
        return Verdict.BAD_ADDRESS
    msg = endorsement_message(params, bundle.commitment, bundle.para, bundle.purpose)
    if not verify_signature(params, authority_public, msg, bundle.signature):
        return Verdict.BAD_SIGNATURE
    if not verify_opening(params, bundle.commitment, bundle.statement(), bundle.proof):
        return Verdict.BAD_PROOF
    return Verdict.ACCEPT


def audit(authority: Authority, address: str) -> str:
    """Map an endorsed address back to the registered real-world identity."""
    c = authority._by_address.get(address)
    if c is None:
        raise UnknownAddress(f"{address} was never endorsed by {authority.name}")
    return authority._registry[authority._endorsements[c].realid_public].real_world_id


# -- applications and the full workflow ------------------------------------


class App:
    def __init__(self, name: str, params: GroupParams, rng: random.Random | None = None):
        self.name = name
        self.params = params
        self.key = keygen(params, rng)
        self._rng = rng

    def verifying_request(self, requirement: str, nonce: int) -> tuple[bytes, Signature]:
        """Workflow step 6: para_app and its auxiliary value aux_app."""
        para_app = json.dumps({"app": self.name, "requirement": requirement, "nonce": nonce}, sort_keys=True).encode()
        return para_app, sign(self.params, self.key, b"para_app" + para_app, self._rng)


def run_workflow(
    params: GroupParams,
    rng: random.Random | None = None,
    *,
    age: int = 30,
    real_world_id: str = "citizen-0001",
    requirement: str = "age>=18",
) -> list[dict]:
    """Execute the ten workflow steps; returns one JSON-ready dict per step."""
    out = []
    authority = Authority("authority-J1", params, rng)
    app = App("app-demo", params, rng)
    user = RealID.create(params, authority.name, rng)

    receipt = register_realid(user, authority, real_world_id, {"age": age}, rng)
    out.append({"step": 1, "action": "register RealID", "realid": user.to_public_dict(),
                "receipt_valid": verify_receipt(params, authority.public_key, receipt)})

    blind = _scalar(params, rng)
    req = request_param(params, user, blind, "network", rng=rng)
    para_auth, aux_auth = issue_param(authority, req)
    out.append({"step": 2, "action": "receive para_auth/aux_auth", "para_auth": para_auth.decode(),
                "aux_auth": aux_auth.to_dict()})

    bcadd = derive_address(params, user.secret, blind, para_auth, aux_auth, "network", authority.public_key, rng=rng)
    out.append({"step": 3, "action": "derive BCADD", "bcadd": bcadd.address, "commitment": hex(bcadd.commitment)})
    out.append({"step": 4, "action": "generate aux_BCADD", "aux_bcadd": bcadd.to_dict()["aux"]})
    v5 = verify_bundle(bcadd, authority.public_key, params)
    out.append({"step": 5, "action": "use BCADD with aux_BCADD", "verdict": v5.value})

    para_app, aux_app = app.verifying_request(requirement, nonce=1)
    app_ok = verify_signature(params, app.key.public, b"para_app" + para_app, aux_app)
    out.append({"step": 6, "action": "app verifying request", "para_app": para_app.decode(),
                "aux_app": aux_app.to_dict(), "aux_app_valid": app_ok})

    blind2 = _scalar(params, rng)
    req2 = request_param(params, user, blind2, "app", attribute=requirement, rng=rng)
    para_auth2, aux_auth2 = issue_param(authority, req2)
    out.append({"step": 7, "action": "receive para_auth'/aux_auth'", "para_auth_prime": para_auth2.decode(),
                "aux_auth_prime": aux_auth2.to_dict()})

    appid = derive_address(params, user.secret, blind2, para_auth2, aux_auth2, "app", authority.public_key,
                           kind="APPID", app_para=para_app, rng=rng)
    out.append({"step": 8, "action": "derive APPID", "appid": appid.address, "commitment": hex(appid.commitment)})
    out.append({"step": 9, "action": "generate aux_APPID", "aux_appid": appid.to_dict()["aux"]})
    v10 = verify_bundle(appid, authority.public_key, params)
    out.append({"step": 10, "action": "public verifies APPID", "verdict": v10.value,
                "audit_bcadd": audit(authority, bcadd.address) == real_world_id,
                "audit_appid": audit(authority, appid.address) == real_world_id})
    return out


def workflow_passed(transcript: list[dict]) -> bool:
    steps = {s["step"]: s for s in transcript}
    return (
        steps[1]["receipt_valid"]
        and steps[5]["verdict"] == "accept"
        and steps[6]["aux_app_valid"]
        and steps[10]["verdict"] == "accept"
        and steps[10]["audit_bcadd"]
        and steps[10]["audit_appid"]
    )


# -- test vectors ----------------------------------------------------------


def make_vector(params: GroupParams, x: int, blind: int, statement: bytes, nonces: tuple[int, int]) -> dict:
    """One deterministic vector line: commitment, address and opening proof."""
    c = commit(params, x, blind)
    proof = prove_opening(params, c, x, blind, statement, nonces=nonces)
    return {
        "p": params.p,
        "q": params.q,
        "g": params.g,
        "h": params.h,
        "context": params.context.decode(),
        "x": x,
        "blind": blind,
        "statement": statement.hex(),
        "nonces": list(nonces),
        "C": c,
        "address": addr_hash(params, c),
        "proof": asdict(proof),
        "accept": verify_opening(params, c, statement, proof),
    }
