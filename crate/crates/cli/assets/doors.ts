# Three-room corridor. `dash` is fast but may overshoot into the hazard
# room; `move` is slow but lands in the goal room for sure.
atoms: hazard goal
inputs: wait move dash
state 0 lobby labels={} init
state 1 pit labels={hazard}
state 2 exit labels={goal}
trans 0 wait 0
trans 0 move 2
trans 0 dash 1
trans 0 dash 2
trans 1 wait 1
trans 1 move 1
trans 1 dash 1
trans 2 wait 2
trans 2 move 2
trans 2 dash 2
