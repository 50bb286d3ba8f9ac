"""
Network families: the tanh rate RNN and the recurrent LIF spiking network,
plus spike-event data handling.
"""
