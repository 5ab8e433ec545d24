#include "msaplan/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

namespace msa {

namespace {

std::string fixed(double v, int digits) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{:.{}f}", v, digits);
}

std::string sci(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{:.6e}", v);
}

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  return out + "\"";
}

std::string_view capacity_name(CapacityMode c) { return c == CapacityMode::Usable ? "usable" : "theoretical"; }

std::string mix_text(const MachineSpec& m, const Mix& mix) {
  std::string out;
  for (const auto& e : mix) {
    if (!out.empty()) out += " + ";
    out += fmt::format("{} {}", m.modules[e.module].name, e.devices);
  }
  return out;
}

AllocationView allocation_view(const Scenario& s, const Mix& mix, CapacityMode capacity) {
  AllocationView v;
  v.capacity = capacity;
  v.classes = device_classes(s.machine, mix, s.case_spec.workload.mem_per_element(), capacity);
  for (const auto& e : mix) v.ranks_per_device.push_back(s.machine.modules[e.module].ranks_per_device());
  v.allocation = solve_allocation(total_cost(s.case_spec.workload), v.classes);
  return v;
}

Table allocation_table(const AllocationView& v, const MachineSpec& m, const Mix& mix, bool with_capacity) {
  Table t;
  if (with_capacity) t.header.push_back("capacity");
  for (const char* h : {"class", "kind", "devices", "ranks_per_device", "p_opt", "c_max_per_device",
                        "elements_per_device", "elements_per_rank", "saturated"}) {
    t.header.emplace_back(h);
  }
  for (std::size_t c = 0; c < v.classes.size(); ++c) {
    const auto& cls = v.classes[c];
    std::vector<std::string> row;
    if (with_capacity) row.emplace_back(capacity_name(v.capacity));
    row.push_back(cls.name);
    row.emplace_back(to_string(m.modules[mix[c].module].kind));
    row.push_back(std::to_string(cls.count));
    row.push_back(std::to_string(v.ranks_per_device[c]));
    row.push_back(fmt::format("{}", cls.p_opt));
    row.push_back(fixed(cls.c_max, 0));
    if (v.allocation.feasible) {
      const double per_device = v.allocation.per_device_cost[c];
      row.push_back(fixed(per_device, 1));
      row.push_back(fixed(per_device / static_cast<double>(v.ranks_per_device[c]), 1));
      row.emplace_back(v.allocation.saturated[c] ? "yes" : "no");
    } else {
      row.insert(row.end(), {"-", "-", "-"});
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table scaling_text_table(const ScalingTable& table) {
  Table t;
  std::stringstream header(std::string(kScalingCsvHeader) + ",linear_ref");
  std::string col;
  while (std::getline(header, col, ',')) t.header.push_back(col);
  for (const auto& r : table.rows) {
    t.rows.push_back({std::to_string(r.devices), std::to_string(r.gpu_devices), std::to_string(r.cpu_cores),
                      fixed(r.elements_per_gpu, 1), fixed(r.elements_per_core, 1), sci(r.t_a_max), sci(r.t_c_max),
                      sci(r.t_io_max), sci(r.t_total), fixed(r.speedup, 4), fixed(r.parallel_efficiency, 4),
                      sci(r.model_tmin), r.domain, sci(r.linear_ref)});
  }
  return t;
}

template <class F>
int guarded(const CommandIo& io, F&& f) {
  try {
    return f();
  } catch (const ScenarioError& e) {
    io.err << "error: " << e.what() << '\n';
  } catch (const std::exception& e) {
    io.err << "error: " << e.what() << '\n';
  }
  return kExitError;
}

std::optional<double> gpu_weight(const Scenario& s) { return s.run.weight; }

}  // namespace

void print_table(std::ostream& out, const Table& table, OutputFormat format) {
  if (format == OutputFormat::Csv) {
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << csv_cell(cells[i]);
      out << '\n';
    };
    line(table.header);
    for (const auto& r : table.rows) line(r);
    return;
  }
  std::vector<std::size_t> width(table.header.size(), 0);
  auto measure = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size() && i < width.size(); ++i) width[i] = std::max(width[i], cells[i].size());
  };
  measure(table.header);
  for (const auto& r : table.rows) measure(r);
  auto line = [&](const std::vector<std::string>& cells) {
    std::string s;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      s += cells[i];
      if (i + 1 < cells.size()) s.append(width[i] - cells[i].size() + 2, ' ');
    }
    out << s << '\n';
  };
  line(table.header);
  for (const auto& r : table.rows) line(r);
}

BoxMesh resolve_mesh(const CaseSpec& c) {
  const auto elements = c.workload.elements();
  if (c.mesh_dims) {
    const auto& d = *c.mesh_dims;
    if (static_cast<std::int64_t>(d[0]) * d[1] * d[2] != elements) {
      throw std::invalid_argument(
          fmt::format("mesh_dims {}x{}x{} do not multiply to {} elements", d[0], d[1], d[2], elements));
    }
    return build_box_mesh(d[0], d[1], d[2]);
  }
  if (!c.box_geometry) {
    throw std::invalid_argument(fmt::format(
        "case '{}' is not a box; give explicit dimensions with case.mesh_dims or --dims", c.name));
  }
  const auto d = auto_box_dims(elements);
  if (!d) {
    throw std::invalid_argument(fmt::format(
        "{} elements have no box factorisation with aspect ratio <= 8; give explicit dimensions with "
        "case.mesh_dims or --dims",
        elements));
  }
  return build_box_mesh((*d)[0], (*d)[1], (*d)[2]);
}

bool RunReport::feasible() const { return !allocations.empty() && allocations.front().allocation.feasible; }

RunReport plan_report(const Scenario& s) {
  RunReport r;
  r.scenario = s;
  r.mix = resolve_mix(s);
  const auto& w = s.case_spec.workload;

  const auto theoretical = device_classes(s.machine, r.mix, w.mem_per_element(), CapacityMode::Theoretical);
  r.memory = feasibility(w, theoretical);

  r.allocations.push_back(allocation_view(s, r.mix, s.run.capacity));
  const auto other = s.run.capacity == CapacityMode::Usable ? CapacityMode::Theoretical : CapacityMode::Usable;
  auto alt = allocation_view(s, r.mix, other);
  if (alt.classes != r.allocations.front().classes) r.allocations.push_back(std::move(alt));

  if (!r.feasible()) return r;

  std::optional<BoxMesh> mesh;
  try {
    mesh = resolve_mesh(s.case_spec);
  } catch (const std::invalid_argument& e) {
    r.simulation_note = fmt::format("timestep not simulated: {}", e.what());
  }
  if (mesh) {
    const auto opts = sim_options(s);
    r.simulation = evaluate_mix(*mesh, w, s.machine, r.mix, gpu_weight(s), opts);
    if (!r.simulation->feasible) {
      r.simulation_note = r.simulation->infeasible_reason;
    } else if (s.run.rel_sigma > 0.0) {
      const auto samples = jittered_samples(r.simulation->estimate, static_cast<std::size_t>(s.run.samples),
                                            s.run.rel_sigma, s.run.seed);
      r.band = ci95(samples);
    }
    if (!s.run.weight_grid.empty()) {
      r.weights = search_weight(*mesh, w, s.machine, r.mix, s.run.weight_grid, opts);
    }
  }
  return r;
}

int cmd_plan(const Scenario& s, const CommandIo& io) {
  return guarded(io, [&] {
    const auto r = plan_report(s);
    const auto& m = s.machine;
    const auto& w = s.case_spec.workload;

    if (io.format == OutputFormat::Csv) {
      Table t;
      for (std::size_t i = 0; i < r.allocations.size(); ++i) {
        auto part = allocation_table(r.allocations[i], m, r.mix, true);
        if (t.header.empty()) t.header = part.header;
        for (auto& row : part.rows) t.rows.push_back(std::move(row));
      }
      t.header.emplace_back("t_min");
      for (std::size_t i = 0, row = 0; i < r.allocations.size(); ++i) {
        for (std::size_t c = 0; c < r.allocations[i].classes.size(); ++c, ++row) {
          t.rows[row].push_back(sci(r.allocations[i].allocation.t_min));
        }
      }
      print_table(io.out, t, OutputFormat::Csv);
    } else {
      auto& out = io.out;
      out << fmt::format("machine {}, case {}: {} elements, N={}, {} grid points\n", m.name, s.case_spec.name,
                         w.elements(), w.poly_order(), grid_points(w));
      out << fmt::format("mix: {}\n", mix_text(m, r.mix));
      out << fmt::format("memory: required {} GB, available {} GB ({})\n", fixed(r.memory.required_gb, 3),
                         fixed(r.memory.available_gb, 3), r.memory.feasible ? "fits" : "does not fit");
      for (const auto& v : r.allocations) {
        out << fmt::format("\nallocation, {} capacity\n", capacity_name(v.capacity));
        print_table(out, allocation_table(v, m, r.mix, false), OutputFormat::Text);
        if (v.allocation.feasible) {
          std::vector<std::string> sat;
          for (auto c : v.allocation.saturated_classes()) sat.push_back(v.classes[c].name);
          out << fmt::format("t_min: {} s per timestep\nsaturated classes: {}\n", sci(v.allocation.t_min),
                             sat.empty() ? std::string("none") : fmt::format("{}", fmt::join(sat, ", ")));
        } else {
          double cap = 0.0;
          for (const auto& c : v.classes) cap += c.aggregate_capacity();
          out << fmt::format("infeasible: {} elements exceed the {} capacity of {} elements\n", w.elements(),
                             capacity_name(v.capacity), fixed(cap, 0));
        }
      }
      if (r.simulation && r.simulation->feasible) {
        const auto& ev = *r.simulation;
        const auto& e = ev.estimate;
        out << fmt::format("\nsimulated timestep ({})\n",
                           s.run.weight ? fmt::format("gpu weight {}", *s.run.weight) : std::string("model split"));
        out << fmt::format("t_a max: {} s\nt_c max: {} s\nt_io max: {} s\ntotal: {} s\ndomain: {}\n",
                           sci(e.max_t_a()), sci(e.max_t_c()), sci(e.max_t_io()), sci(e.total), to_string(e.domain));
        if (r.band) {
          out << fmt::format("jittered total: mean {} s, 95% band +- {} s (seed {}, {} samples)\n",
                             sci(r.band->mean), sci(r.band->half_width), s.run.seed, s.run.samples);
        }
      }
      if (!r.simulation_note.empty()) out << '\n' << r.simulation_note << '\n';
      if (r.weights) {
        out << "\nweight search\n";
        Table t{{"weight", "feasible", "t_total", "elements_per_gpu"}, {}};
        for (const auto& row : r.weights->table) {
          t.rows.push_back({fmt::format("{}", row.weight), row.feasible ? "yes" : "no", sci(row.total),
                            fixed(row.elements_per_gpu, 1)});
        }
        print_table(out, t, OutputFormat::Text);
        if (r.weights->found) {
          out << fmt::format("best weight: {} ({} s)\n", r.weights->best_weight, sci(r.weights->best_time));
        } else {
          out << "best weight: none feasible\n";
        }
      }
    }

    if (!r.feasible()) {
      io.err << fmt::format("infeasible: required {} GB vs available {} GB\n", fixed(r.memory.required_gb, 2),
                            fixed(r.memory.available_gb, 2));
      return kExitInfeasible;
    }
    return kExitOk;
  });
}

int cmd_sweep(const Scenario& s, const CommandIo& io) {
  return guarded(io, [&] {
    if (s.run.counts.empty()) throw std::invalid_argument("no device counts: set run.counts or pass --counts");
    const auto mesh = resolve_mesh(s.case_spec);
    const auto modules = resolve_modules(s);
    const auto table = sweep_strong_scaling(mesh, s.case_spec.workload, s.machine, modules, s.run.counts,
                                            gpu_weight(s), sim_options(s));
    if (io.format == OutputFormat::Csv) {
      write_scaling_csv(io.out, table, true);
    } else {
      print_table(io.out, scaling_text_table(table), OutputFormat::Text);
    }
    const bool any = std::any_of(table.rows.begin(), table.rows.end(), [](const auto& r) { return r.feasible; });
    if (!any) {
      io.err << "infeasible: no sweep point fits the workload\n";
      return kExitInfeasible;
    }
    return kExitOk;
  });
}

int cmd_partition(const Scenario& s, const std::filesystem::path& out_dir, const CommandIo& io) {
  return guarded(io, [&] {
    const auto mesh = resolve_mesh(s.case_spec);
    const auto mix = resolve_mix(s);
    const auto& w = s.case_spec.workload;
    const auto ev = evaluate_mix(mesh, w, s.machine, mix, gpu_weight(s), sim_options(s));
    if (!ev.feasible) {
      io.err << "infeasible: " << ev.infeasible_reason << '\n';
      return kExitInfeasible;
    }

    std::vector<double> weights;
    if (s.run.weight) {
      weights = rank_weights(s.machine, mix, *s.run.weight);
    } else {
      for (std::size_t r = 0; r < ev.layout.num_ranks(); ++r) {
        const auto c = ev.layout.rank_class[r];
        weights.push_back(ev.model.per_device_cost[c] /
                          static_cast<double>(s.machine.modules[mix[c].module].ranks_per_device()));
      }
    }
    const auto stats = partition_stats(ev.partition, weights);
    const bool unit_depth = unit_depth_holds(mesh, ev.partition, ev.plan, w.poly_order());

    std::filesystem::create_directories(out_dir);
    const auto part_path = out_dir / "partition.csv";
    const auto comm_path = out_dir / "comm.csv";
    {
      std::ofstream f(part_path, std::ios::binary);
      if (!f) throw std::runtime_error(fmt::format("cannot write '{}'", part_path.string()));
      write_partition_csv(f, ev.partition);
    }
    {
      std::ofstream f(comm_path, std::ios::binary);
      if (!f) throw std::runtime_error(fmt::format("cannot write '{}'", comm_path.string()));
      write_comm_csv(f, ev.plan);
    }

    Table t{{"mesh", "ranks", "min_count", "max_count", "imbalance", "inter_rank_faces", "points_per_face",
             "exchanged_points", "unit_depth"},
            {}};
    const auto& d = mesh.dims();
    t.rows.push_back({fmt::format("{}x{}x{}", d[0], d[1], d[2]), std::to_string(ev.partition.num_ranks()),
                      std::to_string(stats.min_count), std::to_string(stats.max_count), fixed(stats.imbalance, 6),
                      std::to_string(ev.plan.inter_rank_faces), std::to_string(ev.plan.points_per_face),
                      std::to_string(ev.plan.total_exchanged_points()), unit_depth ? "ok" : "violated"});
    print_table(io.out, t, io.format);
    if (io.format == OutputFormat::Text) {
      io.out << fmt::format("wrote {} and {}\n", part_path.filename().string(), comm_path.filename().string());
    }
    return unit_depth ? kExitOk : kExitError;
  });
}

int cmd_io_report(const Scenario& s, const CommandIo& io) {
  return guarded(io, [&] {
    if (!s.io.enabled) throw std::invalid_argument("I/O is disabled; set io.enabled = true or pass --enable-io");
    const auto mesh = resolve_mesh(s.case_spec);
    const auto mix = resolve_mix(s);
    const auto& w = s.case_spec.workload;
    const auto ev = evaluate_mix(mesh, w, s.machine, mix, gpu_weight(s), sim_options(s));
    if (!ev.feasible) {
      io.err << "infeasible: " << ev.infeasible_reason << '\n';
      return kExitInfeasible;
    }
    const auto rep = io_phase(ev.partition, ev.layout.rank_node, s.io, w.poly_order(), ev.layout.node_io_bw);

    std::vector<std::string> node_module(ev.layout.num_nodes());
    for (std::size_t r = 0; r < ev.layout.num_ranks(); ++r) {
      node_module[ev.layout.rank_node[r]] = ev.layout.classes[ev.layout.rank_class[r]].name;
    }
    Table t{{"node", "module", "elements", "write_seconds"}, {}};
    for (std::size_t n = 0; n < rep.node_seconds.size(); ++n) {
      t.rows.push_back({std::to_string(n), node_module[n], std::to_string(rep.node_elements[n]),
                        sci(rep.node_seconds[n])});
    }
    print_table(io.out, t, io.format);
    const bool flagged = rep.imbalance > 2.0;
    if (io.format == OutputFormat::Text) {
      io.out << fmt::format("\nnode I/O imbalance: {}{}\n", fixed(rep.imbalance, 4),
                            flagged ? " (flagged: above 2)" : "");
    } else {
      io.out << fmt::format("\nimbalance,flagged\n{},{}\n", fixed(rep.imbalance, 6), flagged ? "yes" : "no");
    }
    return kExitOk;
  });
}

int cmd_presets(const CommandIo& io) {
  return guarded(io, [&] {
    Table machines{{"machine", "module", "kind", "device", "nodes", "devices_per_node", "count", "cores_per_node",
                    "mem_per_device_gb", "c_max", "usable_c_max", "p_opt", "eff_half_load"},
                   {}};
    for (const auto& m : builtin_machines()) {
      for (const auto& mod : m.modules) {
        machines.rows.push_back({m.name, mod.name, std::string(to_string(mod.kind)), mod.device,
                                 std::to_string(mod.nodes), std::to_string(mod.devices_per_node),
                                 std::to_string(mod.count), std::to_string(mod.cores_per_node),
                                 fmt::format("{}", mod.mem_per_device_gb), fixed(mod.c_max(kDefaultMemPerElement), 0),
                                 fixed(mod.usable_c_max(kDefaultMemPerElement), 0), fmt::format("{}", mod.p_opt),
                                 fmt::format("{}", mod.eff_half_load)});
      }
    }
    Table cases{{"case", "elements", "poly_order", "grid_points", "memory_gb", "mesh_dims"}, {}};
    for (const auto& c : builtin_cases()) {
      const auto& w = c.workload;
      std::string dims = "explicit";
      if (c.mesh_dims) {
        dims = fmt::format("{}x{}x{}", (*c.mesh_dims)[0], (*c.mesh_dims)[1], (*c.mesh_dims)[2]);
      } else if (c.box_geometry) {
        dims = "auto";
      }
      cases.rows.push_back({c.name, std::to_string(w.elements()), std::to_string(w.poly_order()),
                            std::to_string(grid_points(w)), fixed(w.total_memory(), 3), dims});
    }
    print_table(io.out, machines, io.format);
    io.out << '\n';
    print_table(io.out, cases, io.format);
    return kExitOk;
  });
}

}  // namespace msa
