from app.commands import agent_run, bench, estimate, fetch, generate, prompt, score

COMMANDS = (generate, fetch, estimate, prompt, agent_run, score, bench)
