from locust import HttpUser, task, between

ELECTION = {
    "votes": [[1, 2, 3, 4, 5], [2, 1, 3, 4, 5], [5, 4, 3, 2, 1], [4, 5, 3, 2, 1]],
    "k": 2,
    "solver": {"method": "heuristic", "restarts": 3, "extra_ic": 32, "seed": 1},
}


class WebsiteUser(HttpUser):
    wait_time = between(1, 5)

    @task(3)
    def domain_size(self):
        self.client.get("/domains/sizes", params={"kind": "SPOC", "m": 8})

    @task(2)
    def solve(self):
        self.client.post("/kemeny/solve", json=ELECTION)

    @task
    def enumerate_sp(self):
        self.client.post("/domains/enumerate", json={"kind": "SP", "m": 6})

    @task
    def runs(self):
        self.client.get("/experiments/runs")
