#include <doctest.h>

#include "fixtures.hpp"
#include "uwb/pipeline.hpp"

using namespace uwb;

namespace {

struct Setup {
  ExperimentConfig cfg;
  Experiment e;
  PosteriorModel model;
  explicit Setup(ExperimentConfig c = fixture::desk_config(32))
      : cfg(c), e(build_experiment(cfg)), model(e.model(e.simulate(cfg.snr_db, 5))) {}
};

bool same_trace(const TraceStore& a, const TraceStore& b) {
  if (a.levels.size() != b.levels.size()) return false;
  for (std::size_t l = 0; l < a.levels.size(); ++l) {
    const LevelTrace& x = a.levels[l];
    const LevelTrace& y = b.levels[l];
    if (x.size() != y.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x.iteration(i) != y.iteration(i) || x.stage(i) != y.stage(i) ||
          x.temperature(i) != y.temperature(i) || x.log_posterior(i) != y.log_posterior(i))
        return false;
      for (std::size_t c = 0; c < x.width(); ++c)
        if (x.value(i, c) != y.value(i, c)) return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("stages run in order and the ladder ends stay fixed") {
  const Setup s;
  Pipeline p(s.model, s.cfg.pipeline);
  p.initialize();
  REQUIRE(p.run() == RunStatus::Done);
  const auto& st = p.stage_starts();
  REQUIRE(st.size() == 4);
  for (std::size_t i = 1; i < st.size(); ++i) CHECK(st[i] > st[i - 1]);
  CHECK(st[1] >= s.cfg.pipeline.effective_stage1_min());
  CHECK(st[2] - st[1] == s.cfg.pipeline.stage2_length);
  CHECK(p.ladder()[0] == 1.0);
  CHECK(p.ladder()[p.ladder().size() - 1] == s.cfg.pipeline.t_last);
  CHECK(p.swap_ratios_by_stage().size() == 4);
  const LevelTrace& cold = p.trace().levels[0];
  for (std::size_t i = 1; i < cold.size(); ++i) CHECK(cold.stage(i) >= cold.stage(i - 1));
  CHECK(cold.rows_in_stage(4).size() == static_cast<std::size_t>(s.cfg.pipeline.stage4_length));
  for (std::size_t i = 0; i < cold.size(); ++i) REQUIRE(cold.temperature(i) == 1.0);
}

TEST_CASE("a single level never swaps") {
  ExperimentConfig c = fixture::desk_config(32);
  c.pipeline.levels = 1;
  c.pipeline.t_last = 1.0;
  const Setup s(c);
  Pipeline p(s.model, s.cfg.pipeline);
  p.initialize();
  REQUIRE(p.run() == RunStatus::Done);
  CHECK(p.ledger().pairs() == 0);
  CHECK(p.ladder().size() == 1);
}

TEST_CASE("stage IV leaves every adapted quantity alone") {
  const Setup s;
  Pipeline p(s.model, s.cfg.pipeline);
  p.initialize();
  p.run_until(Stage::IV);
  REQUIRE(p.stage() == Stage::IV);
  const std::uint64_t h = p.adaptation_hash();
  const auto ladder = p.ladder().temperatures;
  while (p.step() == RunStatus::Running) CHECK(p.adaptation_hash() == h);
  CHECK(p.adaptation_hash() == h);
  CHECK(p.ladder().temperatures == ladder);
}

TEST_CASE("checkpoint and resume reproduce the uninterrupted run") {
  const Setup s;
  Pipeline a(s.model, s.cfg.pipeline);
  a.initialize();
  a.run();

  Pipeline b(s.model, s.cfg.pipeline);
  b.initialize();
  b.run(s.cfg.pipeline.effective_stage1_min() + 37);
  const nlohmann::json ck = nlohmann::json::parse(b.checkpoint().dump());
  Pipeline c(s.model, s.cfg.pipeline);
  c.restore(ck);
  c.run();
  CHECK(c.status() == RunStatus::Done);
  CHECK(c.iteration() == a.iteration());
  CHECK(same_trace(a.trace(), c.trace()));
  CHECK(c.adaptation_hash() == a.adaptation_hash());

  PipelineConfig other = s.cfg.pipeline;
  other.seed += 1;
  Pipeline d(s.model, other);
  CHECK_THROWS(d.restore(ck));
}

TEST_CASE("results do not depend on the worker count") {
  const Setup s;
  PipelineConfig one = s.cfg.pipeline;
  one.workers = 1;
  one.stage4_length = 20;
  PipelineConfig three = one;
  three.workers = 3;
  Pipeline a(s.model, one), b(s.model, three);
  a.initialize();
  b.initialize();
  a.run();
  b.run();
  CHECK(same_trace(a.trace(), b.trace()));
}

TEST_CASE("kernel can be switched before stage III only") {
  const Setup s;
  Pipeline p(s.model, s.cfg.pipeline);
  p.initialize();
  p.run_until(Stage::III);
  CHECK_NOTHROW(p.set_kernel(KernelKind::Mh));
  p.step();
  p.step();
  CHECK_THROWS(p.set_kernel(KernelKind::Slice));
}

TEST_CASE("a slice kernel has nothing to adapt in Stage III") {
  ExperimentConfig c = fixture::desk_config(32);
  c.pipeline.kernel = KernelKind::Slice;
  const Setup s(c);
  Pipeline p(s.model, s.cfg.pipeline);
  p.initialize();
  REQUIRE(p.run() == RunStatus::Done);
  REQUIRE(p.stage_starts().size() == 4);
  CHECK(p.stage_starts()[3] == p.stage_starts()[2]);

  const Setup h;
  Pipeline q(h.model, h.cfg.pipeline);
  q.initialize();
  q.run_until(Stage::III);
  q.set_kernel(KernelKind::Slice);
  CHECK(q.stage() == Stage::IV);
  REQUIRE(q.run() == RunStatus::Done);
  CHECK(q.stage_starts()[3] == q.stage_starts()[2]);
}
