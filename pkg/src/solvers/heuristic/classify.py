import logging
import math

import numpy as np
from sklearn.neighbors import NearestNeighbors
from sklearn.preprocessing import MinMaxScaler

from ...entities.catalog import VmSpec, WorkloadProfile
from ...entities.offline import VmTypeKey
from ...errors import UnclassifiedVmError

logger = logging.getLogger(__name__)


def _features(key: VmTypeKey) -> list[float]:
    # constant profiles carry their whole workload as the standing load
    standing = key.baseline_pct if key.profile is WorkloadProfile.LINEAR else key.peak_workload_pct
    return [math.log(key.rate_mbps), standing, math.log(key.popularity_share)]


class TypeClassifier:
    """Matches VMs to known types; unseen VMs go to the nearest type of the same
    profile family under an L1 distance over min-max scaled features."""

    def __init__(self, keys: list[VmTypeKey], nearest: bool = True):
        self.keys = sorted(set(keys), key=VmTypeKey.sort_key)
        self.nearest = nearest
        self._families = {}
        for profile in WorkloadProfile:
            family = [key for key in self.keys if key.profile is profile]
            if not family:
                continue
            features = np.array([_features(key) for key in family])
            scaler = MinMaxScaler().fit(features)
            index = NearestNeighbors(n_neighbors=len(family), metric="manhattan").fit(
                scaler.transform(features)
            )
            self._families[profile] = (family, scaler, index)

    def classify(self, spec: VmSpec) -> VmTypeKey:
        key = VmTypeKey.from_spec(spec)
        if key in self.keys:
            return key
        if not self.nearest:
            raise UnclassifiedVmError(f"No type matches VM {spec.id} ({key.label})")
        if key.profile not in self._families:
            raise UnclassifiedVmError(f"No {key.profile.value} type known for VM {spec.id}")

        family, scaler, index = self._families[key.profile]
        query = scaler.transform(np.array([_features(key)]))
        distances, positions = index.kneighbors(query)
        ranked = sorted(
            zip(np.round(distances[0], 9), positions[0]),
            key=lambda item: (item[0], family[item[1]].sort_key()),
        )
        match = family[ranked[0][1]]
        logger.info(f"VM {spec.id} ({key.label}) matched to nearest type {match.label}")
        return match


def classify(spec: VmSpec, keys: list[VmTypeKey], nearest: bool = True) -> VmTypeKey:
    return TypeClassifier(keys, nearest=nearest).classify(spec)
