"""Drive the HTTP service the way the what-if explorer does: one base state,
a handful of counterfactuals, deltas against the base. Uses only urllib so
the script runs anywhere the package does.

    python3 demos/whatif_over_http.py
"""

import json
import threading
import urllib.request

from winprob import (
    GameState,
    Possession,
    TrainConfig,
    featurize_matrix,
    fit_standardizer,
    gen_glm_dataset,
    standardize_matrix,
    train_glm,
)
from winprob.service import make_server

W_DEMO = [0.3, 0.12, 0.05, -0.05, 0.0002, 0.2, 0.05, 0.1, 0.04, -0.06, -0.15,
          0.003, -0.012, 0.08, 0.04, -0.04, -0.1, 0.004, -0.015, 0.03, 0.04]


def post(url: str, payload: dict) -> dict:
    req = urllib.request.Request(
        url, data=json.dumps(payload).encode(), headers={"Content-Type": "application/json"}
    )
    with urllib.request.urlopen(req) as resp:
        return json.loads(resp.read())


def main():
    ds = gen_glm_dataset(W_DEMO, 0.0, 8_000, seed=23)
    x = featurize_matrix(ds.states())
    stats = fit_standardizer(x)
    model = train_glm(standardize_matrix(x, stats), ds.labels(), TrainConfig(seed=23), stats)

    server = make_server(model, port=0)
    port = server.server_address[1]
    threading.Thread(target=server.serve_forever, daemon=True).start()
    base_url = f"http://127.0.0.1:{port}"
    print(f"serving on {base_url}")

    with urllib.request.urlopen(f"{base_url}/v1/health") as resp:
        print("health:", json.loads(resp.read()))

    # Down 4 with the ball, 4th and 2 at midfield, 5:00 left.
    base = GameState(
        time_elapsed_s=3300,
        score_diff=-4,
        possession=Possession.HOME,
        down=4,
        yards_to_go=2,
        field_position=50,
        home_timeouts=2,
        away_timeouts=3,
        home_possession_time_s=1500,
        rating_diff=0.0,
    )
    variants = {
        "converted (1st and 10)": base.to_dict() | {"down": 1, "yards_to_go": 10, "field_position": 55},
        "turnover on downs": base.to_dict() | {"possession": "A", "down": 1, "yards_to_go": 10, "field_position": 50},
        "took the lead instead": base.to_dict() | {"score_diff": 3},
        "one fewer timeout": base.to_dict() | {"home_timeouts": 1},
    }

    out = post(
        f"{base_url}/v1/whatif",
        {"base": base.to_dict(), "variants": list(variants.values())},
    )
    print()
    print(f"base p_home = {out['base_p_home']:.4f}  ({out['model_type']})")
    width = max(len(k) for k in variants)
    for name, v in zip(variants, out["variants"]):
        print(f"  {name:<{width}}  p_home {v['p_home']:.4f}  delta {v['delta']:+.4f}")

    server.shutdown()
    server.server_close()


if __name__ == "__main__":
    main()
