from pydantic import BaseModel, Field


class CoreParams(BaseModel):
    model_config = {"extra": "forbid", "frozen": True}

    router_port_w: float = Field(default=638.0, gt=0)
    transponder_w: float = Field(default=129.0, gt=0)
    edfa_w: float = Field(default=11.0, gt=0)
    optical_switch_w: float = Field(default=85.0, gt=0)
    regen_w: float = Field(default=114.0, gt=0)


class MetroParams(BaseModel):
    model_config = {"extra": "forbid", "frozen": True}

    port_rate_gbps: float = Field(default=40.0, gt=0)
    port_w: float = Field(default=30.0, gt=0)
    redundancy: int = Field(default=2, ge=1)
    switch_rate_gbps: float = Field(default=600.0, gt=0)
    switch_w: float = Field(default=470.0, gt=0)


class PonParams(BaseModel):
    model_config = {"extra": "forbid", "frozen": True}

    olt_w: float = Field(default=1842.0, gt=0)
    onu_w: float = Field(default=5.0, gt=0)


class ComputeParams(BaseModel):
    model_config = {"extra": "forbid", "frozen": True}

    server_w: float = Field(default=333.0, gt=0)
    server_max_workload_pct: float = Field(default=100.0, gt=0)
    switch_redundancy: int = Field(default=2, ge=1)
    cloud_switch_rate_gbps: float = Field(default=600.0, gt=0)
    cloud_switch_w: float = Field(default=470.0, gt=0)
    metro_fog_switch_rate_gbps: float = Field(default=600.0, gt=0)
    metro_fog_switch_w: float = Field(default=470.0, gt=0)
    access_fog_switch_rate_gbps: float = Field(default=240.0, gt=0)
    access_fog_switch_w: float = Field(default=210.0, gt=0)
    cloud_port_rate_gbps: float = Field(default=40.0, gt=0)
    cloud_port_w: float = Field(default=30.0, gt=0)
    metro_fog_port_rate_gbps: float = Field(default=40.0, gt=0)
    metro_fog_port_w: float = Field(default=13.0, gt=0)
    access_fog_port_rate_gbps: float = Field(default=40.0, gt=0)
    access_fog_port_w: float = Field(default=13.0, gt=0)


class PueParams(BaseModel):
    model_config = {"extra": "forbid", "frozen": True}

    cloud: float = Field(default=1.3, ge=1)
    metro_fog: float = Field(default=1.4, ge=1)
    access_fog: float = Field(default=1.5, ge=1)
    network: float = Field(default=1.5, ge=1)


# (cloud, metro fog, access fog) PUE presets
PUE_PROFILES: dict[str, tuple[float, float, float]] = {
    "best-practice": (1.3, 1.4, 1.5),
    "2014": (1.7, 1.9, 2.5),
}


class PowerParams(BaseModel):
    model_config = {"extra": "forbid", "frozen": True}

    core: CoreParams = CoreParams()
    metro: MetroParams = MetroParams()
    pon: PonParams = PonParams()
    compute: ComputeParams = ComputeParams()
    pue: PueParams = PueParams()

    def with_pue_profile(self, profile: str) -> "PowerParams":
        if profile == "custom":
            return self
        cloud, metro_fog, access_fog = PUE_PROFILES[profile]
        pue = self.pue.model_copy(
            update={"cloud": cloud, "metro_fog": metro_fog, "access_fog": access_fog}
        )
        return self.model_copy(update={"pue": pue})
