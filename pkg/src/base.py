from abc import ABC, abstractmethod


class BaseScenarioLoader(ABC):
    @abstractmethod
    def load(self, *, file_path):
        pass


class BasePlacementSolver(ABC):
    @abstractmethod
    def solve(self):
        pass
