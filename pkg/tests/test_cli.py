import pytest

from polyquery.cli import main

ML_XML = """
<configuration>
  <input><database><sql>SELECT trip_id, fare, duration FROM trips WHERE fare > 0</sql></database></input>
  <parameter><value>2</value><value>50</value><value>0.0001</value><value>7</value></parameter>
  <algorithm>KMeans</algorithm>
  <primary_sql>SELECT * FROM trips WHERE fare &lt; 0</primary_sql>
</configuration>
"""
DB_XML = "<database><url>local:.</url><user>u</user><password></password></database>"


@pytest.fixture
def data_dir(tmp_path):
    (tmp_path / "trips.csv").write_text(
        "trip_id,city,fare,duration\n1,a,10.5,30\n2,a,20.0,45\n3,b,7.25,12\n4,b,,20\n5,c,33.0,90\n"
    )
    assert main(["load", "trips", str(tmp_path / "trips.csv"), "--data-dir", str(tmp_path)]) == 0
    return tmp_path


class TestLoad:
    def test_load_prints_schema(self, tmp_path, capsys):
        (tmp_path / "t.csv").write_text("a,fare\n1,2.5\n")
        assert main(["load", "t", str(tmp_path / "t.csv"), "--data-dir", str(tmp_path)]) == 0
        out = capsys.readouterr().out
        assert "registered t" in out
        assert "fare:Float64" in out

    def test_duplicate_load_is_user_error(self, data_dir, capsys):
        code = main(["load", "trips", str(data_dir / "trips.csv"), "--data-dir", str(data_dir)])
        assert code == 1
        assert "already registered" in capsys.readouterr().err


class TestQuery:
    def test_query_prints_table(self, data_dir, capsys):
        code = main(["query", "SELECT city, COUNT(*) AS n FROM trips GROUP BY city ORDER BY city",
                     "--data-dir", str(data_dir)])
        assert code == 0
        out = capsys.readouterr().out
        assert "city" in out and "(3 rows)" in out

    def test_query_csv_mode(self, data_dir, capsys):
        code = main(["query", "SELECT city FROM trips ORDER BY city LIMIT 1", "--csv",
                     "--data-dir", str(data_dir)])
        assert code == 0
        assert capsys.readouterr().out.startswith("city\r\na\r\n")

    def test_syntax_error_exit_code(self, data_dir, capsys):
        assert main(["query", "SELEC", "--data-dir", str(data_dir)]) == 1
        assert "syntax error" in capsys.readouterr().err

    def test_env_var_data_dir(self, data_dir, capsys, monkeypatch):
        monkeypatch.setenv("HMDAP_DATA_DIR", str(data_dir))
        assert main(["query", "SELECT * FROM trips"]) == 0

    def test_missing_data_dir(self, capsys, monkeypatch):
        monkeypatch.delenv("HMDAP_DATA_DIR", raising=False)
        assert main(["query", "SELECT 1 FROM t"]) == 1


class TestAnalyze:
    def test_analyze_writes_stats(self, data_dir, capsys):
        assert main(["analyze", "trips", "--data-dir", str(data_dir)]) == 0
        assert (data_dir / "stats.json").exists()
        assert "trips: 5 rows" in capsys.readouterr().out


class TestRun:
    def test_run_pipeline_with_output(self, data_dir, tmp_path, capsys):
        ml = tmp_path / "ml.xml"
        db = tmp_path / "db.xml"
        ml.write_text(ML_XML)
        db.write_text(DB_XML)
        out_csv = tmp_path / "result.csv"
        code = main([
            "run", "--ml-config", str(ml), "--db-config", str(db),
            "--data-dir", str(data_dir), "--output", str(out_csv),
        ])
        assert code == 0
        stdout = capsys.readouterr().out
        assert "branches: ML, Relational" in stdout
        text = out_csv.read_bytes()
        assert text.startswith(b"trip_id,fare,duration,cluster\r\n")

    def test_run_resolves_local_dir_relative_to_db_config(self, data_dir, capsys, monkeypatch):
        monkeypatch.delenv("HMDAP_DATA_DIR", raising=False)
        ml = data_dir / "ml.xml"
        db = data_dir / "db.xml"
        ml.write_text(ML_XML)
        db.write_text(DB_XML)  # url local:. -> the db config's directory
        assert main(["run", "--ml-config", str(ml), "--db-config", str(db)]) == 0

    def test_missing_config_file(self, data_dir, capsys):
        code = main(["run", "--ml-config", "/nope.xml", "--db-config", "/nope2.xml",
                     "--data-dir", str(data_dir)])
        assert code == 1
        assert "cannot read config" in capsys.readouterr().err
