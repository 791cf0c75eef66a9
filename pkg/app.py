import tempfile
from pathlib import Path

import streamlit as st

from config.numerics import DEFAULT_MAX_QUOTIENT_SIZE, DEFAULT_TOWER
from core.experiment_runner import (
    analysis_report,
    density_report,
    run_betti_approx,
    run_det_approx,
    run_identity_checks,
    run_mapping_torus,
    run_torsion_growth,
    run_trace_approx,
)
from core.groupring import GroupRingError, GroupRingMatrix, parse_poly
from core.report_engine import generate_pdf_report
from core.torsion_lab import (
    ChainComplexError,
    mapping_torus_complex,
    remark_complex,
    section9_complex,
)
from core.towers import TowerSpecError, parse_tower
from l2 import COMPUTATION_ERRORS, UsageError, parse_field, parse_matrix_text

st.set_page_config(
    page_title="L² Invariants Lab",
    layout="wide",
)

EXPERIMENTS = [
    "det-approx",
    "betti-approx",
    "trace-approx",
    "torsion-growth",
    "mapping-torus",
    "section9",
    "density",
    "check-identities",
]

# ---------------- SIDEBAR ----------------
st.sidebar.title("🧮 Experiment Inputs")

experiment = st.sidebar.selectbox("Experiment", EXPERIMENTS)

st.sidebar.markdown("---")

if experiment in ("det-approx", "betti-approx", "trace-approx"):
    ambient_rank = st.sidebar.selectbox("Ambient rank n of ℤⁿ", [1, 2, 3])
    poly_text = st.sidebar.text_input("Laurent polynomial (1x1 matrix)", "z - 2")

if experiment in ("det-approx", "betti-approx", "trace-approx", "torsion-growth"):
    tower_text = st.sidebar.text_input("Tower", DEFAULT_TOWER)
    max_size = st.sidebar.number_input(
        "Max quotient size", min_value=1, value=DEFAULT_MAX_QUOTIENT_SIZE
    )
    jobs = st.sidebar.selectbox("Parallel jobs", [1, 2, 4, 8])

if experiment == "betti-approx":
    field_text = st.sidebar.text_input("Field (Q or Fp:P)", "Q")

if experiment == "trace-approx":
    degree = st.sidebar.selectbox("Largest power j", list(range(0, 6)), index=2)

if experiment == "torsion-growth":
    source = st.sidebar.selectbox("Complex", ["mapping torus", "non-acyclic remark"])
    if source == "mapping torus":
        torus_text = st.sidebar.text_input("Matrix M", "2,1;1,1")
    else:
        remark_text = st.sidebar.text_input("a,b,k,l,g", "2,1,3,2,5")

if experiment == "mapping-torus":
    torus_text = st.sidebar.text_input("Matrix M", "2,1;1,1")
    d_max = st.sidebar.number_input("d_max", min_value=1, value=40)
    field_text = st.sidebar.text_input("Field (Q or Fp:P)", "Q")

if experiment == "section9":
    col_a, col_b = st.sidebar.columns(2)
    a = col_a.number_input("a", value=2, step=1)
    b = col_b.number_input("b", value=1, step=1)
    k = col_a.number_input("k", value=3, step=1)
    l = col_b.number_input("l", value=2, step=1)
    g = st.sidebar.number_input("g", min_value=1, value=5, step=1)

if experiment == "density":
    n_lo, n_hi = st.sidebar.slider("Range of n", 2, 60, (2, 20))

if experiment == "check-identities":
    count = st.sidebar.number_input("Random complexes", min_value=1, value=100)
    seed = st.sidebar.number_input("Seed", min_value=0, value=0)

# ---------------- MAIN ----------------
st.title("L²-Invariants of ℤⁿ-Towers")

run_experiment = st.button("▶️ Run Experiment")


def _build_report():
    if experiment in ("det-approx", "betti-approx", "trace-approx"):
        A = GroupRingMatrix.from_rows(ambient_rank, [[parse_poly(poly_text, ambient_rank)]])
        tower = parse_tower(tower_text)
        if experiment == "det-approx":
            return run_det_approx(A, tower, int(max_size), jobs)
        if experiment == "betti-approx":
            return run_betti_approx(A, tower, parse_field(field_text), int(max_size), jobs)
        return run_trace_approx(A, tower, degree, int(max_size), jobs)

    if experiment == "torsion-growth":
        if source == "mapping torus":
            C = mapping_torus_complex(parse_matrix_text(torus_text))
        else:
            C = remark_complex(*(int(x) for x in remark_text.split(",")))
        return run_torsion_growth(C, parse_tower(tower_text), int(max_size), jobs)

    if experiment == "mapping-torus":
        return run_mapping_torus(
            parse_matrix_text(torus_text), int(d_max), parse_field(field_text)
        )

    if experiment == "section9":
        params = [int(a), int(b), int(k), int(l), int(g)]
        return analysis_report("section9", section9_complex(*params), {"parameters": params})

    if experiment == "density":
        return density_report(range(n_lo, n_hi + 1))

    return run_identity_checks(int(count), int(seed))


if run_experiment:

    try:
        with st.spinner(f"Running {experiment}..."):
            report = _build_report()
    except (GroupRingError, TowerSpecError, ChainComplexError, UsageError, ValueError) as e:
        st.error(f"Invalid input: {e}")
        st.stop()
    except COMPUTATION_ERRORS as e:
        st.error(f"Computation failed: {e}")
        st.stop()

    st.subheader("📊 Values")
    frame = report.to_frame()
    if frame.empty:
        st.info("No rows: every tower index exceeded the size cap.")
    else:
        st.dataframe(frame, use_container_width=True)

    if report.limit_reference is not None:
        st.metric(
            f"Limit reference ({report.limit_provenance})",
            f"{report.limit_reference:.12g}",
        )

    passed = report.metadata.get("passed")
    if passed is True:
        st.success("All checks passed.")
    elif passed is False:
        st.error("Some checks failed.")

    with st.expander("Metadata"):
        st.json(report.to_dict()["metadata"])

    st.download_button(
        "⬇️ Download CSV",
        report.to_csv(),
        file_name=f"{report.experiment}.csv",
        mime="text/csv",
    )

    with st.spinner("Rendering PDF..."):
        pdf_path = generate_pdf_report(
            report, Path(tempfile.mkdtemp()) / f"{report.experiment}.pdf"
        )
    st.download_button(
        "⬇️ Download PDF",
        pdf_path.read_bytes(),
        file_name=pdf_path.name,
        mime="application/pdf",
    )

else:
    st.info("Choose an experiment in the sidebar and click **Run Experiment** to begin.")
