"""Shared fixtures for the demo scripts: a small weather knowledge graph and
a generator of random chain-structured graphs for training corpora."""

import random

from tab2kg.rdf import RDF_TYPE, RdfGraph, iri, literal

EX = "http://example.org/synth/"
SOSA = "http://www.w3.org/ns/sosa/"
TIME = "http://www.w3.org/2006/time#"
RDFS_LABEL = "http://www.w3.org/2000/01/rdf-schema#label"

SKY_SENSORS_TSV = (
    "cloudy\t16:30\t17:00\tS2\n"
    "clear\t17:00\t17:30\tS3\n"
    "rain\t16:30\t17:00\tS3\n"
    "cloudy\t06:15\t09:45\tS1\n"
    "clear\t08:40\t12:10\tS1\n"
    "rain\t10:05\t13:35\tS1\n"
    "cloudy\t12:20\t15:50\tS2\n"
)

_SLOTS = ((59400, 61200), (61200, 63000), (22500, 35100),
          (31200, 43800), (36300, 48900), (44400, 57000))

_CONDITIONS = ("cloudy", "clear", "rain", "sunny", "fog", "storm")


def _hhmm(seconds):
    return f"{seconds // 3600:02d}:{(seconds // 60) % 60:02d}"


def make_weather_kg(n_sensors=4, n_observations=12):
    """SSN-style instances; sensor labels S4.. are disjoint from the demo
    table's S1..S3, so interpretation happens without instance overlap."""
    rng = random.Random("weather-fixture")
    graph = RdfGraph()
    graph.bind("sosa", SOSA)
    graph.bind("time", TIME)
    graph.bind("rdfs", "http://www.w3.org/2000/01/rdf-schema#")
    graph.bind("ex", EX)
    sensors = []
    for s in range(n_sensors):
        sensor = iri(f"{EX}weather/sensor{s}")
        graph.add(sensor, RDF_TYPE, iri(SOSA + "Sensor"))
        graph.add(sensor, RDFS_LABEL, literal(f"S{s + 4}"))
        sensors.append(sensor)
    for o in range(n_observations):
        observation = iri(f"{EX}weather/observation{o}")
        interval = iri(f"{EX}weather/interval{o}")
        graph.add(observation, RDF_TYPE, iri(SOSA + "Observation"))
        graph.add(interval, RDF_TYPE, iri(TIME + "Interval"))
        graph.add(observation, SOSA + "hasSimpleResult",
                  literal(rng.choice(_CONDITIONS)))
        graph.add(observation, RDFS_LABEL, literal(f"observation no. {o}"))
        begin, end = rng.choice(_SLOTS)
        jitter = rng.choice((-600, -300, 0, 300, 600))
        graph.add(interval, TIME + "hasBeginning", literal(_hhmm(begin + jitter)))
        graph.add(interval, TIME + "hasEnd", literal(_hhmm(end + jitter)))
        graph.add(rng.choice(sensors), SOSA + "madeObservation", observation)
        graph.add(observation, SOSA + "phenomenonTime", interval)
    return graph


_WORDS = (
    "alder ash aspen beech birch cedar cherry elm fir hazel juniper larch "
    "linden maple oak pine poplar rowan spruce willow yew alpine arctic "
    "coastal desert meadow prairie tundra valley ridge summit"
).split()


def _archetypes(rng):
    def numeric_normal():
        mu = rng.uniform(5, 5000) * rng.choice([0.01, 1, 100])
        sigma = abs(mu) * rng.uniform(0.05, 0.4) + rng.uniform(0.1, 2.0)
        decimals = rng.choice([1, 2, 3])
        return lambda r: f"{r.gauss(mu, sigma):.{decimals}f}"

    def numeric_int():
        lo = rng.randint(0, 500)
        hi = lo + rng.randint(30, 5000)
        return lambda r: str(r.randint(lo, hi))

    def text_word():
        vocab = rng.sample(_WORDS, rng.randint(4, 12))
        return lambda r: r.choice(vocab)

    def text_phrase():
        vocab = rng.sample(_WORDS, rng.randint(6, 14))
        return lambda r: f"{r.choice(vocab)} {r.choice(vocab)}"

    def text_code():
        prefix = "".join(rng.sample("ABCDEFGHKLMNPRSTUWXYZ", rng.randint(1, 3)))
        width = rng.choice([2, 3, 4])
        return lambda r: f"{prefix}{r.randint(0, 10 ** width - 1):0{width}d}"

    def temporal_time():
        base = rng.randint(0, 20) * 3600
        span = rng.randint(2, 10) * 3600
        with_seconds = rng.random() < 0.5
        def gen(r):
            s = base + r.randint(0, span)
            if with_seconds:
                return f"{(s // 3600) % 24:02d}:{(s // 60) % 60:02d}:{s % 60:02d}"
            return _hhmm(s)
        return gen

    def temporal_interval():
        base = rng.randint(5, 18) * 3600
        span = rng.randint(2, 8) * 3600
        offset = rng.choice([900, 1800, 3600, 7200])
        step = rng.choice([300, 900, 1800])
        state = {}

        def gen_begin(r):
            state["last"] = base + r.randint(0, span // step) * step
            return _hhmm(state["last"])

        def gen_end(r):
            return _hhmm(state.get("last", base) + offset)

        return [gen_begin, gen_end]

    def temporal_date():
        year = rng.randint(1950, 2020)
        def gen(r):
            return f"{year + r.randint(0, 30):04d}-{r.randint(1, 12):02d}-{r.randint(1, 28):02d}"
        return gen

    def boolean():
        p = rng.uniform(0.2, 0.8)
        return lambda r: "true" if r.random() < p else "false"

    return [numeric_normal, numeric_int, text_word, text_phrase, text_code,
            temporal_time, temporal_interval, temporal_date, boolean]


def make_random_kg(seed, entities_per_class=(36, 72), one_to_one=False):
    """A chain of 2-3 classes with randomly parameterized value generators;
    see tests/_synth.py for the variant used by the test suite."""
    rng = random.Random(f"kg:{seed}")
    n_classes = rng.randint(2, 3)
    n_entities = rng.randint(*entities_per_class)
    factories = _archetypes(rng)
    graph = RdfGraph()
    graph.bind("ex", EX)
    classes = [f"{EX}kg{seed}/Class{c}" for c in range(n_classes)]
    link_props = [f"{EX}kg{seed}/link{c}" for c in range(n_classes - 1)]
    generators = {}
    for c, cls in enumerate(classes):
        relations = []
        for r in range(rng.randint(2, 3)):
            produced = rng.choice(factories)()
            parts = produced if isinstance(produced, list) else [produced]
            for part, gen in enumerate(parts):
                relations.append((f"{EX}kg{seed}/p{c}_{r}_{part}", gen))
        generators[cls] = relations
    value_rng = random.Random(f"values:{seed}")
    link_rng = random.Random(f"links:{seed}")
    entities = []
    for c, cls in enumerate(classes):
        tier = []
        for i in range(n_entities):
            entity = iri(f"{EX}kg{seed}/e{c}_{i}")
            graph.add(entity, RDF_TYPE, iri(cls))
            for prop, gen in generators[cls]:
                graph.add(entity, prop, literal(gen(value_rng)))
            tier.append(entity)
        entities.append(tier)
    for c in range(1, n_classes):
        for i, child in enumerate(entities[c]):
            parent = entities[c - 1][i] if one_to_one else link_rng.choice(entities[c - 1])
            graph.add(parent, link_props[c - 1], child)
    return graph


def train_demo_model(epochs=100, seed=11, n_kgs=48, verbose=True):
    """Train the mapping model on a seeded synthetic corpus (~10 s)."""
    from tab2kg.datagen import GenConfig, make_instances, make_training_pairs
    from tab2kg.matcher import TrainConfig, train

    kgs = [make_random_kg(s, one_to_one=(s % 2 == 0)) for s in range(n_kgs)]
    instances = make_instances(kgs, GenConfig(seed=7))
    pairs = make_training_pairs(instances)
    if verbose:
        print(f"  corpus: {len(instances)} instances -> {len(pairs)} labeled pairs")
    result = train(pairs, TrainConfig(epochs=epochs, seed=seed))
    if verbose and result.history:
        last = result.history[-1]
        print(f"  trained {len(result.history)} epochs, "
              f"val accuracy {last['val_accuracy']:.3f}, "
              f"val loss {last['val_loss']:.3f}")
    return result


def shorten(iri_value):
    return iri_value.rsplit("/", 1)[-1].rsplit("#", 1)[-1]
